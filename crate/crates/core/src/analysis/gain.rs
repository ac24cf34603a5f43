use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::linalg::{gram, HermitianSpectrum};
use crate::scalar::{c, CMatrix, Real};

/// Average gain of the rKA on `B^H = [Ghat^H, sqrt(xi) I]` and its bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainReport<T: Real> {
    /// `(lambda_min + xi) / (||Ghat||_F^2 + K xi)`.
    pub kappa_closed: T,
    /// Projection-operator value, when computed.
    pub kappa_generic: Option<T>,
    /// `lambda_min / ||Ghat||_F^2`.
    pub remark1_lower: T,
    pub remark1_upper: T,
    pub remark2_lower: T,
    pub lambda_min: T,
    pub frobenius_sq: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemarkBounds {
    /// `1 / K`.
    pub upper: f64,
    /// `(1 - sqrt(K / M))^2 / K`, the large-system value for i.i.d. channels.
    pub lower_iid: f64,
}

pub fn remark_bounds(m: usize, k: usize) -> Result<RemarkBounds> {
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= K <= M, got M={m}, K={k}"
        )));
    }
    let kf = k as f64;
    Ok(RemarkBounds {
        upper: 1.0 / kf,
        lower_iid: (1.0 - (kf / m as f64).sqrt()).powi(2) / kf,
    })
}

pub fn average_gain_closed<T: Real>(ghat: &CMatrix<T>, xi: T) -> Result<GainReport<T>> {
    let (m, k) = ghat.shape();
    let bounds = remark_bounds(m.max(k), k)?;
    let lambda_min = HermitianSpectrum::new(&gram(ghat)).min().max(T::zero());
    let frobenius_sq = ghat.norm_squared();
    let kt = T::lit(k as f64);
    let total = frobenius_sq + kt * xi;
    if !(total > T::zero()) {
        return Err(Error::DegenerateProbabilities);
    }
    let remark1_lower = if frobenius_sq > T::zero() {
        lambda_min / frobenius_sq
    } else {
        T::zero()
    };
    Ok(GainReport {
        kappa_closed: (lambda_min + xi) / total,
        kappa_generic: None,
        remark1_lower,
        remark1_upper: T::lit(bounds.upper),
        remark2_lower: T::lit(bounds.lower_iid),
        lambda_min,
        frobenius_sq,
    })
}

/// Row matrix `B^H = [Ghat^H, sqrt(xi) I_K]`.
pub fn b_hermitian<T: Real>(ghat: &CMatrix<T>, xi: T) -> CMatrix<T> {
    let (m, k) = ghat.shape();
    let mut out = CMatrix::zeros(k, m + k);
    out.view_mut((0, 0), (k, m)).copy_from(&ghat.adjoint());
    let s = xi.max(T::zero()).sqrt();
    for i in 0..k {
        out[(i, m + i)] = c(s);
    }
    out
}

/// `min_{x in X} x^H P x / ||x||^2` with `P = sum_z p_z a_z a_z^H / ||a_z||^2`,
/// where `a_z^H` is row `z` of `rows` and `X` is the span of the rows with
/// nonzero probability.
pub fn average_gain_generic<T: Real>(rows: &CMatrix<T>, p: &[T]) -> Result<T> {
    let (nz, n) = rows.shape();
    if p.len() != nz {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities for {nz} rows",
            p.len()
        )));
    }
    let mut cols = Vec::new();
    let mut proj = CMatrix::<T>::zeros(n, n);
    for (z, &pz) in p.iter().enumerate() {
        if pz < T::zero() {
            return Err(Error::InvalidArgument(format!(
                "probability {z} is negative"
            )));
        }
        if pz == T::zero() {
            continue;
        }
        let col = rows.row(z).adjoint();
        let energy = col.norm_squared();
        if !(energy > T::zero()) {
            return Err(Error::ZeroRowWithProbability(z));
        }
        proj += (&col * col.adjoint()) * c(pz / energy);
        cols.push(col);
    }
    if cols.is_empty() {
        return Err(Error::DegenerateProbabilities);
    }
    let a = CMatrix::from_columns(&cols);
    let svd = SVD::new(a, true, false);
    let u = svd.u.ok_or(Error::NonFinite)?;
    let smax = svd
        .singular_values
        .iter()
        .copied()
        .fold(T::zero(), |x, y| x.max(y));
    let tol = smax * T::lit((n.max(nz)) as f64) * T::default_epsilon() * T::lit(10.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    let mut q = CMatrix::<T>::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        q.set_column(j, &u.column(i));
    }
    let restricted = q.adjoint() * proj * &q;
    Ok(HermitianSpectrum::new(&restricted).min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combining::sample_probabilities;
    use crate::scalar::complex_normal_matrix;
    use crate::StreamKey;

    #[test]
    fn orthonormal_columns_hit_the_upper_bound() {
        let q = complex_normal_matrix::<f64, _>(6, 3, &mut StreamKey::new(1).rng())
            .qr()
            .q();
        let r = average_gain_closed(&q, 0.0).unwrap();
        assert!((r.kappa_closed - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(r.remark1_upper, 1.0 / 3.0);
    }

    #[test]
    fn pure_ridge() {
        let r = average_gain_closed(&CMatrix::<f64>::zeros(4, 2), 1.0).unwrap();
        assert_eq!(r.kappa_closed, 0.5);
    }

    #[test]
    fn remark2_values() {
        let b = remark_bounds(100, 10).unwrap();
        assert!((b.lower_iid - 0.046754).abs() < 5e-7);
        assert_eq!(remark_bounds(7, 7).unwrap().lower_iid, 0.0);
        assert_eq!(remark_bounds(7, 3).unwrap().upper, 1.0 / 3.0);
        assert!(remark_bounds(3, 4).is_err());
    }

    #[test]
    fn generic_single_and_orthogonal_rows() {
        let mut rng = StreamKey::new(2).rng();
        let a = complex_normal_matrix::<f64, _>(1, 5, &mut rng);
        assert!((average_gain_generic(&a, &[1.0]).unwrap() - 1.0).abs() < 1e-12);

        let mut two = CMatrix::<f64>::zeros(2, 3);
        two[(0, 0)] = c(2.0);
        two[(1, 2)] = c(2.0);
        assert!((average_gain_generic(&two, &[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn generic_matches_closed_form() {
        let mut rng = StreamKey::new(3).rng();
        for xi in [0.0, 0.3, 2.0] {
            let g = complex_normal_matrix::<f64, _>(8, 2, &mut rng);
            let bh = b_hermitian(&g, xi);
            let p = sample_probabilities(&g, xi).unwrap();
            let generic = average_gain_generic(&bh, &p).unwrap();
            let closed = average_gain_closed(&g, xi).unwrap().kappa_closed;
            assert!((generic - closed).abs() < 1e-8, "{generic} vs {closed}");
        }
    }

    #[test]
    fn zero_row_with_probability_is_rejected() {
        let rows = CMatrix::<f64>::zeros(2, 2);
        assert_eq!(
            average_gain_generic(&rows, &[0.5, 0.5]),
            Err(Error::ZeroRowWithProbability(0))
        );
    }
}
