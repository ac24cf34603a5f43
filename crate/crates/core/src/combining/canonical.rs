use crate::error::{Error, Result};
use crate::linalg::{add_ridge, gram, HermitianSpectrum};
use crate::scalar::{CMatrix, Real};

use super::{Combiner, CombinerMethod};

fn check_finite<T: Real>(g: &CMatrix<T>) -> Result<()> {
    if g.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn singular<T: Real>(gram: &CMatrix<T>) -> Error {
    Error::SingularGram {
        condition: HermitianSpectrum::new(gram).condition_number().as_f64(),
    }
}

/// `D = (Ghat^H Ghat + xi I)^{-1}` by a Cholesky solve.
///
/// With `xi = 0` the Gram matrix must be numerically full rank; the check
/// rejects condition numbers beyond `1 / (100 K eps)`.
pub fn rzf_factor<T: Real>(ghat: &CMatrix<T>, xi: T) -> Result<CMatrix<T>> {
    check_finite(ghat)?;
    if xi < T::zero() || !xi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "regularization {xi} must be >= 0"
        )));
    }
    let k = ghat.ncols();
    let a = add_ridge(&gram(ghat), xi);
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or_else(|| singular(&a))?;
    if xi == T::zero() {
        let l = chol.l_dirty();
        let diag: Vec<T> = (0..k).map(|i| l[(i, i)].re).collect();
        let hi = diag.iter().copied().fold(T::zero(), |a, b| a.max(b));
        let lo = diag.iter().copied().fold(hi, |a, b| a.min(b));
        let limit = T::one() / (T::lit(100.0 * k as f64) * T::default_epsilon());
        if !(lo > T::zero()) || (hi / lo) * (hi / lo) > limit {
            return Err(singular(&a));
        }
    }
    Ok(chol.solve(&CMatrix::identity(k, k)))
}

/// `V = Ghat (Ghat^H Ghat + xi I)^{-1}`.
pub fn rzf_combiner<T: Real>(ghat: &CMatrix<T>, xi: T) -> Result<Combiner<T>> {
    let d = rzf_factor(ghat, xi)?;
    Ok(Combiner {
        v: ghat * d,
        method: if xi == T::zero() {
            CombinerMethod::Zf
        } else {
            CombinerMethod::Rzf
        },
        d: None,
    })
}

/// `V = Ghat (Ghat^H Ghat)^{-1}`, the pseudo-inverse of `Ghat^H`.
pub fn zf_combiner<T: Real>(ghat: &CMatrix<T>) -> Result<Combiner<T>> {
    rzf_combiner(ghat, T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c, complex_normal_matrix};
    use crate::StreamKey;

    #[test]
    fn identity_channel_with_unit_ridge() {
        let g = CMatrix::<f64>::identity(3, 3);
        let v = rzf_combiner(&g, 1.0).unwrap().v;
        assert!((v - CMatrix::<f64>::identity(3, 3).map(|x| x * c(0.5))).norm() < 1e-15);
    }

    #[test]
    fn zf_inverts_and_orthonormal_is_fixed() {
        let mut rng = StreamKey::new(11).rng();
        let g = complex_normal_matrix::<f64, _>(8, 3, &mut rng);
        let zf = zf_combiner(&g).unwrap();
        assert_eq!(zf.method, CombinerMethod::Zf);
        assert!((g.adjoint() * &zf.v - CMatrix::identity(3, 3)).norm() <= 1e-8 * 3.0);

        let q = g.clone().qr().q();
        let v = zf_combiner(&q).unwrap().v;
        assert!((v - q).norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_zf_fails() {
        let mut g = CMatrix::<f64>::zeros(4, 2);
        g[(0, 0)] = c(1.0);
        g[(0, 1)] = c(2.0);
        match zf_combiner(&g) {
            Err(Error::SingularGram { condition }) => assert!(condition > 1e12),
            other => panic!("{other:?}"),
        }
        assert!(rzf_combiner(&g, 0.1).is_ok());
    }

    #[test]
    fn non_finite_and_negative_ridge_rejected() {
        let mut g = CMatrix::<f64>::identity(2, 2);
        assert!(rzf_combiner(&g, -1.0).is_err());
        g[(1, 0)] = c(f64::NAN);
        assert_eq!(rzf_combiner(&g, 1.0).unwrap_err(), Error::NonFinite);
    }
}
