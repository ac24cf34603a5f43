//! Orthogonal-pilot observations and LS / MMSE channel estimation.
//!
//! With `tau_p` orthogonal pilots sent at the data power, despreading the
//! received pilot block yields one column per UE,
//! `y_k = sqrt(tau_p rho) g_k + n_k` with unit-variance noise.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{CovarianceSet, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{add_ridge, hpd_solve, symmetrize, trace_re};
use crate::scalar::{c, complex_normal, CMatrix, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Perfect CSI, `Ghat = G`.
    True,
    Ls,
    Mmse,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::True => "true",
            Self::Ls => "ls",
            Self::Mmse => "mmse",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "perfect" => Ok(Self::True),
            "ls" => Ok(Self::Ls),
            "mmse" => Ok(Self::Mmse),
            other => Err(Error::InvalidArgument(format!(
                "unknown estimator `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PilotObservation<T: Real> {
    /// Column `k` is `sqrt(tau_p rho) g_k + n_k`.
    pub yp: CMatrix<T>,
}

impl<T: Real> PilotObservation<T> {
    /// Observation with an explicit noise block.
    pub fn with_noise(g: &CMatrix<T>, config: &SystemConfig, noise: &CMatrix<T>) -> Self {
        let gain = c(T::lit(pilot_gain(config)));
        Self {
            yp: g.map(|x| x * gain) + noise,
        }
    }
}

/// `sqrt(tau_p rho_ul)`.
pub fn pilot_gain(config: &SystemConfig) -> f64 {
    (config.tau_p() as f64 * config.rho_ul()).sqrt()
}

pub fn observe_pilots<T: Real, R: Rng + ?Sized>(
    g: &CMatrix<T>,
    config: &SystemConfig,
    rng: &mut R,
) -> PilotObservation<T> {
    let mut noise = CMatrix::<T>::zeros(g.nrows(), g.ncols());
    for x in noise.iter_mut() {
        *x = complex_normal(rng);
    }
    PilotObservation::with_noise(g, config, &noise)
}

#[derive(Debug, Clone)]
pub struct ChannelEstimate<T: Real> {
    pub ghat: CMatrix<T>,
    pub estimator: EstimatorKind,
    /// Per-UE MMSE error covariance `R - R Q^{-1} R`.
    pub error_cov: Option<Arc<Vec<CMatrix<T>>>>,
}

pub fn true_estimate<T: Real>(g: &CMatrix<T>) -> ChannelEstimate<T> {
    ChannelEstimate {
        ghat: g.clone(),
        estimator: EstimatorKind::True,
        error_cov: None,
    }
}

/// `ghat_k = y_k / sqrt(tau_p rho)`.
pub fn ls_estimate<T: Real>(
    obs: &PilotObservation<T>,
    config: &SystemConfig,
) -> ChannelEstimate<T> {
    let inv = c(T::lit(1.0 / pilot_gain(config)));
    ChannelEstimate {
        ghat: obs.yp.map(|x| x * inv),
        estimator: EstimatorKind::Ls,
        error_cov: None,
    }
}

#[derive(Debug, Clone)]
enum Filter<T: Real> {
    Scalar(T),
    Dense(CMatrix<T>),
}

/// Per-drop MMSE filters `R_k (R_k + I / (tau_p rho))^{-1}`, computed once and
/// applied to every pilot observation of the drop.
#[derive(Debug, Clone)]
pub struct MmseEstimator<T: Real> {
    filters: Vec<Filter<T>>,
    error_cov: Arc<Vec<CMatrix<T>>>,
    inv_gain: T,
}

impl<T: Real> MmseEstimator<T> {
    pub fn new(cov: &CovarianceSet<T>, config: &SystemConfig) -> Result<Self> {
        let g = pilot_gain(config);
        Self::with_ridge(cov, 1.0 / (g * g), 1.0 / g)
    }

    /// Filters for ridge `eps = 1 / (tau_p rho)` and LS scaling `inv_gain`.
    pub fn with_ridge(cov: &CovarianceSet<T>, eps: f64, inv_gain: f64) -> Result<Self> {
        let eps_t = T::lit(eps);
        let mut filters = Vec::with_capacity(cov.len());
        let mut errors = Vec::with_capacity(cov.len());
        for (k, entry) in cov.entries().iter().enumerate() {
            let m = entry.r.nrows();
            if entry.is_scaled_identity() {
                let v = entry.r[(0, 0)].re;
                let a = v / (v + eps_t);
                filters.push(Filter::Scalar(a));
                errors.push(CMatrix::from_diagonal_element(
                    m,
                    m,
                    c(v * eps_t / (v + eps_t)),
                ));
            } else {
                let q = add_ridge(&entry.r, eps_t);
                let x = hpd_solve(&q, &entry.r).ok_or(Error::NotPsd {
                    index: k,
                    min_eigenvalue: f64::NAN,
                    tolerance: eps,
                })?;
                let a = x.adjoint();
                let mut err = &entry.r - &a * &entry.r;
                symmetrize(&mut err);
                filters.push(Filter::Dense(a));
                errors.push(err);
            }
        }
        Ok(Self {
            filters,
            error_cov: Arc::new(errors),
            inv_gain: T::lit(inv_gain),
        })
    }

    pub fn error_covariances(&self) -> &[CMatrix<T>] {
        &self.error_cov
    }

    pub fn estimate(&self, obs: &PilotObservation<T>) -> ChannelEstimate<T> {
        let mut ghat = obs.yp.map(|x| x * c(self.inv_gain));
        for (k, filter) in self.filters.iter().enumerate() {
            match filter {
                Filter::Scalar(a) => ghat.column_mut(k).scale_mut(*a),
                Filter::Dense(a) => {
                    let col = a * ghat.column(k);
                    ghat.set_column(k, &col);
                }
            }
        }
        ChannelEstimate {
            ghat,
            estimator: EstimatorKind::Mmse,
            error_cov: Some(Arc::clone(&self.error_cov)),
        }
    }
}

pub fn mmse_estimate<T: Real>(
    obs: &PilotObservation<T>,
    cov: &CovarianceSet<T>,
    config: &SystemConfig,
) -> Result<ChannelEstimate<T>> {
    Ok(MmseEstimator::new(cov, config)?.estimate(obs))
}

/// Empirical per-UE NMSE, `mean_t ||ghat_k - g_k||^2 / tr(R_k)`.
pub fn nmse<T: Real>(
    estimates: &[ChannelEstimate<T>],
    truths: &[CMatrix<T>],
    cov: &CovarianceSet<T>,
) -> Result<Vec<T>> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} estimates for {} channels",
            estimates.len(),
            truths.len()
        )));
    }
    let k = cov.len();
    let mut acc = vec![T::zero(); k];
    for (est, g) in estimates.iter().zip(truths) {
        if est.ghat.shape() != g.shape() || g.ncols() != k {
            return Err(Error::DimensionMismatch(
                "estimate and channel shapes differ".into(),
            ));
        }
        for (i, a) in acc.iter_mut().enumerate() {
            *a += (est.ghat.column(i) - g.column(i)).norm_squared();
        }
    }
    let n = T::lit(estimates.len() as f64);
    acc.iter()
        .enumerate()
        .map(|(i, &a)| {
            let tr = trace_re(cov.r(i));
            if tr <= T::zero() {
                Err(Error::ZeroTrace(i))
            } else {
                Ok(a / (n * tr))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{covariance_correlated, sample_channel};
    use crate::scalar::complex_normal_matrix;
    use crate::StreamKey;

    fn unit_config(m: usize, k: usize, snr: f64) -> SystemConfig {
        // rho chosen so that tau_p * rho = snr
        let mut cfg = SystemConfig::dense_urban(m, k);
        cfg.noise_power_dbm = 0.0;
        cfg.ul_power_dbm = 10.0 * (snr / k as f64).log10();
        cfg
    }

    #[test]
    fn noiseless_ls_is_exact() {
        let cfg = unit_config(4, 2, 3.0);
        let mut rng = StreamKey::new(1).rng();
        let g = complex_normal_matrix::<f64, _>(4, 2, &mut rng);
        let obs = PilotObservation::with_noise(&g, &cfg, &CMatrix::zeros(4, 2));
        let gain = pilot_gain(&cfg);
        assert!((obs.yp.clone() - g.map(|x| x * gain)).norm() < 1e-12);
        let est = ls_estimate(&obs, &cfg);
        assert!((est.ghat - g).norm() < 1e-12);
    }

    #[test]
    fn pure_noise_observation() {
        let cfg = unit_config(4, 2, 3.0);
        let mut rng = StreamKey::new(2).rng();
        let z = CMatrix::<f64>::zeros(4, 2);
        let n = 5000;
        let mut p = 0.0;
        for _ in 0..n {
            p += observe_pilots(&z, &cfg, &mut rng).yp.norm_squared();
        }
        assert!((p / (8 * n) as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn observation_variance_additivity() {
        let cfg = unit_config(4, 1, 2.5);
        let beta = 0.8;
        let cov = CovarianceSet::from_matrices(vec![CMatrix::from_diagonal_element(4, 4, c(beta))])
            .unwrap();
        let mut rng = StreamKey::new(3).rng();
        let n = 10_000;
        let mut p = 0.0;
        for _ in 0..n {
            let g = sample_channel(&cov, &mut rng).g;
            p += observe_pilots(&g, &cfg, &mut rng).yp.norm_squared();
        }
        let want = 2.5 * beta + 1.0;
        assert!((p / (4 * n) as f64 / want - 1.0).abs() < 0.05);
    }

    /// Runs `n` realizations and returns (NMSE_LS, NMSE_MMSE) per UE.
    fn nmse_pair(
        cov: &CovarianceSet<f64>,
        cfg: &SystemConfig,
        n: usize,
        seed: u64,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut rng = StreamKey::new(seed).rng();
        let mmse = MmseEstimator::new(cov, cfg).unwrap();
        let mut ls = Vec::new();
        let mut mm = Vec::new();
        let mut gs = Vec::new();
        for _ in 0..n {
            let g = sample_channel(cov, &mut rng).g;
            let obs = observe_pilots(&g, cfg, &mut rng);
            ls.push(ls_estimate(&obs, cfg));
            mm.push(mmse.estimate(&obs));
            gs.push(g);
        }
        (nmse(&ls, &gs, cov).unwrap(), nmse(&mm, &gs, cov).unwrap())
    }

    #[test]
    fn scalar_nmse_closed_forms() {
        for &snr in &[0.5, 1.0, 4.0] {
            let cfg = unit_config(8, 1, snr);
            let cov = CovarianceSet::from_matrices(vec![CMatrix::identity(8, 8)]).unwrap();
            let (ls, mm) = nmse_pair(&cov, &cfg, 4000, 4);
            assert!((ls[0] * snr - 1.0).abs() < 0.05, "LS {} at {snr}", ls[0]);
            assert!(
                (mm[0] * (1.0 + snr) - 1.0).abs() < 0.05,
                "MMSE {} at {snr}",
                mm[0]
            );
        }
    }

    #[test]
    fn mmse_beats_ls_on_correlated_channels() {
        let cfg = unit_config(6, 2, 1.0);
        let mut rng = StreamKey::new(5).rng();
        let e0 = covariance_correlated::<f64, _>(0.0, 0.5, 0.4, 4.0, 6, &mut rng).unwrap();
        let e1 = covariance_correlated::<f64, _>(-3.0, 0.9, -1.0, 4.0, 6, &mut rng).unwrap();
        let cov = CovarianceSet::from_entries(vec![e0, e1]).unwrap();
        let (ls, mm) = nmse_pair(&cov, &cfg, 4000, 6);
        for k in 0..2 {
            assert!(mm[k] <= ls[k] + 0.01, "{mm:?} {ls:?}");
        }
    }

    #[test]
    fn vanishing_ridge_reduces_to_ls() {
        let mut rng = StreamKey::new(7).rng();
        let e = covariance_correlated::<f64, _>(0.0, 0.5, 0.2, 2.0, 4, &mut rng).unwrap();
        let cov = CovarianceSet::from_entries(vec![e]).unwrap();
        let est = MmseEstimator::with_ridge(&cov, 1e-12, 1.0).unwrap();
        let obs = PilotObservation {
            yp: complex_normal_matrix::<f64, _>(4, 1, &mut rng),
        };
        let mm = est.estimate(&obs).ghat;
        assert!((&mm - &obs.yp).norm() <= 1e-6 * obs.yp.norm());
    }

    #[test]
    fn zero_prior_gives_zero_estimate() {
        let cfg = unit_config(3, 1, 1.0);
        let cov = CovarianceSet::<f64>::from_matrices(vec![CMatrix::zeros(3, 3)]).unwrap();
        let mut rng = StreamKey::new(8).rng();
        let obs = observe_pilots(&CMatrix::zeros(3, 1), &cfg, &mut rng);
        let est = mmse_estimate(&obs, &cov, &cfg).unwrap();
        assert!(est.ghat.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn error_covariance_is_psd() {
        let cfg = unit_config(5, 1, 2.0);
        let mut rng = StreamKey::new(9).rng();
        let e = covariance_correlated::<f64, _>(0.0, 0.8, 1.0, 4.0, 5, &mut rng).unwrap();
        let cov = CovarianceSet::from_entries(vec![e]).unwrap();
        let est = MmseEstimator::new(&cov, &cfg).unwrap();
        let spec = crate::linalg::HermitianSpectrum::new(&est.error_covariances()[0]);
        assert!(spec.min() >= -1e-12 * trace_re(cov.r(0)));
        assert!(trace_re(&est.error_covariances()[0]) <= trace_re(cov.r(0)));
    }

    #[test]
    fn nmse_of_true_estimate_is_zero_and_zero_trace_errors() {
        let mut rng = StreamKey::new(10).rng();
        let cov = CovarianceSet::from_matrices(vec![CMatrix::<f64>::identity(2, 2)]).unwrap();
        let g = sample_channel(&cov, &mut rng).g;
        assert_eq!(
            nmse(&[true_estimate(&g)], std::slice::from_ref(&g), &cov).unwrap(),
            vec![0.0]
        );
        let zero = CovarianceSet::from_matrices(vec![CMatrix::<f64>::zeros(2, 2)]).unwrap();
        assert_eq!(
            nmse(&[true_estimate(&g)], &[g], &zero),
            Err(Error::ZeroTrace(0))
        );
    }

    #[test]
    fn estimator_names_parse() {
        for kind in [EstimatorKind::True, EstimatorKind::Ls, EstimatorKind::Mmse] {
            assert_eq!(kind.name().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert!("zf".parse::<EstimatorKind>().is_err());
    }
}
