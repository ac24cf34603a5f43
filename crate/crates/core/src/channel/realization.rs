use rand::Rng;

use super::covariance::{CovarianceSet, Factor};
use crate::scalar::{c, complex_normal, CMatrix, Real};

/// True channels `g_k ~ N_C(0, R_k)` stacked as the columns of `G`.
#[derive(Debug, Clone)]
pub struct ChannelRealization<T: Real> {
    pub g: CMatrix<T>,
}

/// Draws one small-scale realization, `g_k = L_k w_k` with `w_k ~ N_C(0, I)`.
pub fn sample_channel<T: Real, R: Rng + ?Sized>(
    cov: &CovarianceSet<T>,
    rng: &mut R,
) -> ChannelRealization<T> {
    let m = cov.m();
    let mut g = CMatrix::<T>::zeros(m, cov.len());
    let mut w = CMatrix::<T>::zeros(m, 1);
    for (k, entry) in cov.entries().iter().enumerate() {
        for x in w.iter_mut() {
            *x = complex_normal(rng);
        }
        match entry.factor() {
            Factor::ScaledIdentity(v) => {
                let s = c(v.sqrt());
                for (dst, src) in g.column_mut(k).iter_mut().zip(w.iter()) {
                    *dst = *src * s;
                }
            }
            Factor::Dense(l) => g.set_column(k, &(l * &w).column(0)),
        }
    }
    ChannelRealization { g }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::covariance_correlated;
    use crate::StreamKey;

    #[test]
    fn zero_covariance_zero_channel() {
        let cov = CovarianceSet::<f64>::from_matrices(vec![CMatrix::zeros(3, 3)]).unwrap();
        let g = sample_channel(&cov, &mut StreamKey::new(1).rng()).g;
        assert!(g.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn white_channel_unit_variance() {
        let cov = CovarianceSet::<f64>::from_matrices(vec![CMatrix::identity(4, 4)]).unwrap();
        let mut rng = StreamKey::new(2).rng();
        let n = 10_000;
        let mut acc = [0.0; 4];
        for _ in 0..n {
            let g = sample_channel(&cov, &mut rng).g;
            for (a, x) in acc.iter_mut().zip(g.iter()) {
                *a += x.norm_sqr();
            }
        }
        for a in acc {
            assert!((a / n as f64 - 1.0).abs() < 0.05);
        }
    }

    /// Sample covariance oracle: `(1/N) sum g g^H -> R`.
    fn sample_covariance(cov: &CovarianceSet<f64>, n: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = StreamKey::new(seed).rng();
        let m = cov.m();
        let mut acc = CMatrix::<f64>::zeros(m, m);
        for _ in 0..n {
            let g = sample_channel(cov, &mut rng).g;
            let col = g.column(0);
            acc += col * col.adjoint();
        }
        acc / c(n as f64)
    }

    #[test]
    fn two_by_two_correlation() {
        let mut rng = StreamKey::new(3).rng();
        let e = covariance_correlated::<f64, _>(0.0, 0.5, 0.0, 0.0, 2, &mut rng).unwrap();
        let cov = CovarianceSet::from_entries(vec![e]).unwrap();
        let s = sample_covariance(&cov, 10_000, 4);
        assert!((s[(0, 1)].re - 0.5).abs() < 0.05 * 0.5, "{}", s[(0, 1)]);
    }

    #[test]
    fn sample_covariance_consistency() {
        let mut rng = StreamKey::new(5).rng();
        let e = covariance_correlated::<f64, _>(0.0, 0.7, 1.3, 4.0, 8, &mut rng).unwrap();
        let cov = CovarianceSet::from_entries(vec![e]).unwrap();
        let s = sample_covariance(&cov, 100_000, 6);
        let rel = (&s - cov.r(0)).norm() / cov.r(0).norm();
        assert!(rel <= 0.05, "{rel}");
    }
}
