//! Use-and-forget SINR and spectral efficiency by Monte Carlo.
//!
//! For UE `k` with combiner `v_k`, the per-trial statistics are
//! `a = v_k^H g_k`, `b = sum_i |v_k^H g_i|^2` and `c = ||v_k||^2`, and
//!
//! `gamma_k = rho |E a|^2 / (rho E b - rho |E a|^2 + E c)`.
//!
//! Standard errors propagate the sample covariance of `(Re a, Im a, b, c)`
//! through the gradient of `gamma` (delta method).

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::SystemConfig;
use crate::combining::Combiner;
use crate::error::{Error, Result};
use crate::scalar::{cabs, CMatrix, Real};
use crate::stream::StreamKey;

use super::montecarlo::Realization;

/// `(Re a, Im a, b, c)` for one UE in one trial.
pub type UeMoments = [f64; 4];

/// Per-UE statistics of one combiner on one channel realization.
pub fn trial_moments<T: Real>(v: &CMatrix<T>, g: &CMatrix<T>) -> Result<Vec<UeMoments>> {
    if v.shape() != g.shape() {
        return Err(Error::DimensionMismatch(format!(
            "combiner {:?} and channel {:?}",
            v.shape(),
            g.shape()
        )));
    }
    let x = v.ad_mul(g);
    Ok((0..v.ncols())
        .map(|k| {
            let a = x[(k, k)];
            let b = x.row(k).iter().fold(T::zero(), |s, z| s + z.norm_sqr());
            [
                a.re.as_f64(),
                a.im.as_f64(),
                b.as_f64(),
                v.column(k).norm_squared().as_f64(),
            ]
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SeEstimate<T: Real> {
    pub sinr: Vec<T>,
    pub se: Vec<T>,
    pub sinr_stderr: Vec<T>,
    pub se_stderr: Vec<T>,
    /// `tau_ul / tau_c`.
    pub prefactor: T,
    pub trials: usize,
}

impl<T: Real> SeEstimate<T> {
    /// Average SE per UE.
    pub fn mean_se(&self) -> T {
        let n = T::lit(self.se.len() as f64);
        self.se.iter().fold(T::zero(), |a, &b| a + b) / n
    }

    /// Standard error of [`Self::mean_se`], treating UEs as independent.
    pub fn mean_se_stderr(&self) -> T {
        let n = T::lit(self.se.len() as f64);
        self.se_stderr
            .iter()
            .fold(T::zero(), |a, &b| a + b * b)
            .sqrt()
            / n
    }
}

/// Running mean and co-moment (Welford) of the per-UE moment vectors.
#[derive(Debug, Clone)]
pub struct SinrAccumulator {
    n: usize,
    mean: Vec<[f64; 4]>,
    comoment: Vec<[[f64; 4]; 4]>,
}

impl SinrAccumulator {
    pub fn new(k: usize) -> Self {
        Self {
            n: 0,
            mean: vec![[0.0; 4]; k],
            comoment: vec![[[0.0; 4]; 4]; k],
        }
    }

    pub fn trials(&self) -> usize {
        self.n
    }

    pub fn push_moments(&mut self, moments: &[UeMoments]) -> Result<()> {
        if moments.len() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} UEs pushed into an accumulator for {}",
                moments.len(),
                self.mean.len()
            )));
        }
        self.n += 1;
        let n = self.n as f64;
        for (k, x) in moments.iter().enumerate() {
            let before: [f64; 4] = std::array::from_fn(|i| x[i] - self.mean[k][i]);
            for i in 0..4 {
                self.mean[k][i] += before[i] / n;
            }
            for i in 0..4 {
                for j in 0..4 {
                    self.comoment[k][i][j] += before[i] * (x[j] - self.mean[k][j]);
                }
            }
        }
        Ok(())
    }

    pub fn push<T: Real>(&mut self, v: &CMatrix<T>, g: &CMatrix<T>) -> Result<()> {
        self.push_moments(&trial_moments(v, g)?)
    }

    pub fn finish<T: Real>(&self, rho: f64, prefactor: f64) -> Result<SeEstimate<T>> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("no trials accumulated".into()));
        }
        let n = self.n as f64;
        let k = self.mean.len();
        let pre = T::lit(prefactor);
        let mut out = SeEstimate {
            sinr: Vec::with_capacity(k),
            se: Vec::with_capacity(k),
            sinr_stderr: Vec::with_capacity(k),
            se_stderr: Vec::with_capacity(k),
            prefactor: pre,
            trials: self.n,
        };
        for ue in 0..k {
            let mean = self.mean[ue];
            let (are, aim, b, c) = (mean[0], mean[1], mean[2], mean[3]);
            let num = rho * (are * are + aim * aim);
            let den = rho * b - num + c;
            let scale = rho * b + c;
            let (gamma, grad) = if num == 0.0 {
                (0.0, [0.0; 4])
            } else if den <= 1e-15 * scale {
                return Err(Error::NegativeDenominator { ue, value: den });
            } else {
                let d2 = den * den;
                (
                    num / den,
                    [
                        2.0 * rho * are * (den + num) / d2,
                        2.0 * rho * aim * (den + num) / d2,
                        -num * rho / d2,
                        -num / d2,
                    ],
                )
            };
            let var = if self.n > 1 {
                let mut acc = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        let cov = self.comoment[ue][i][j] / (n - 1.0);
                        acc += grad[i] * cov * grad[j];
                    }
                }
                acc.max(0.0) / n
            } else {
                f64::NAN
            };
            let sinr_stderr = var.sqrt();
            let gamma_t = T::lit(gamma);
            out.se.push(pre * (T::one() + gamma_t).log2());
            out.sinr.push(gamma_t);
            out.sinr_stderr.push(T::lit(sinr_stderr));
            out.se_stderr.push(T::lit(
                prefactor * sinr_stderr / ((1.0 + gamma) * std::f64::consts::LN_2),
            ));
        }
        Ok(out)
    }
}

/// Produces channel realizations and their estimates, one per trial key.
pub trait ChannelSource<T: Real>: Sync {
    fn config(&self) -> &SystemConfig;

    fn realize(&self, key: StreamKey) -> Result<Realization<T>>;
}

/// Eq. of the use-and-forget bound evaluated over `n_trials` realizations.
/// Trial `i` uses stream `key.child(i)`; the factory gets its own sub-stream.
pub fn sinr_se_montecarlo<T, S, F>(
    source: &S,
    factory: F,
    n_trials: usize,
    key: StreamKey,
) -> Result<SeEstimate<T>>
where
    T: Real,
    S: ChannelSource<T>,
    F: Fn(&Realization<T>, &mut ChaCha8Rng) -> Result<Combiner<T>> + Sync,
{
    if n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be >= 1".into()));
    }
    let moments: Vec<Vec<UeMoments>> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let trial = key.child(i as u64);
            let real = source.realize(trial.child(0))?;
            let combiner = factory(&real, &mut trial.child(1).rng())?;
            if combiner.v.iter().any(|x| !cabs(*x).is_finite()) {
                return Err(Error::NonFinite);
            }
            trial_moments(&combiner.v, &real.g)
        })
        .collect::<Result<_>>()?;
    let cfg = source.config();
    let mut acc = SinrAccumulator::new(moments[0].len());
    for m in &moments {
        acc.push_moments(m)?;
    }
    acc.finish(cfg.rho_ul(), cfg.prefactor())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_single_ue() {
        // v = g, known channel: gamma = rho |g|^2
        let g = 0.8f64;
        let mut acc = SinrAccumulator::new(1);
        for _ in 0..3 {
            acc.push_moments(&[[g * g, 0.0, g.powi(4), g * g]]).unwrap();
        }
        let rho = 5.0;
        let est: SeEstimate<f64> = acc.finish(rho, 0.95).unwrap();
        assert!((est.sinr[0] - rho * g * g).abs() < 1e-12);
        assert_eq!(est.se[0], 0.95 * (1.0 + est.sinr[0]).log2());
        assert!(est.sinr_stderr[0].abs() < 1e-12);
    }

    #[test]
    fn prefactor_arithmetic() {
        let mut acc = SinrAccumulator::new(1);
        // a = 1, b = 1, c = rho -> gamma = 1
        let rho = 2.0;
        acc.push_moments(&[[1.0, 0.0, 1.0, rho]]).unwrap();
        let est: SeEstimate<f64> = acc.finish(rho, 190.0 / 200.0).unwrap();
        assert!((est.sinr[0] - 1.0).abs() < 1e-15);
        assert!((est.se[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn zero_column_gives_zero_sinr() {
        let mut acc = SinrAccumulator::new(2);
        acc.push_moments(&[[0.0; 4], [1.0, 0.0, 1.0, 1.0]]).unwrap();
        let est: SeEstimate<f64> = acc.finish(1.0, 1.0).unwrap();
        assert_eq!(est.sinr[0], 0.0);
        assert_eq!(est.se[0], 0.0);
    }

    #[test]
    fn negative_denominator_is_an_error() {
        let mut acc = SinrAccumulator::new(1);
        // E b < |E a|^2 is impossible for real data
        acc.push_moments(&[[2.0, 0.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            acc.finish::<f64>(1.0, 1.0),
            Err(Error::NegativeDenominator { ue: 0, .. })
        ));
    }

    #[test]
    fn empty_accumulator_errors() {
        assert!(SinrAccumulator::new(1).finish::<f64>(1.0, 1.0).is_err());
        assert!(SinrAccumulator::new(1)
            .push_moments(&[[0.0; 4]; 2])
            .is_err());
    }
}
