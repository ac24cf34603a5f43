//! Drop-conditioned Monte Carlo scenarios and SE-versus-iterations curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    drop_users, sample_channel, CovarianceModel, CovarianceSet, SystemConfig, UserDrop,
};
use crate::combining::{rka_parl_checkpoints, rzf_combiner, Init, RkaOptions};
use crate::error::{Error, Result};
use crate::estimation::{
    ls_estimate, observe_pilots, true_estimate, ChannelEstimate, EstimatorKind, MmseEstimator,
};
use crate::scalar::{CMatrix, Real};
use crate::stream::StreamKey;

use super::se::{trial_moments, ChannelSource, SeEstimate, SinrAccumulator, UeMoments};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub config: SystemConfig,
    pub estimator: EstimatorKind,
    pub covariance: CovarianceModel,
}

impl Scenario {
    pub fn new(
        config: SystemConfig,
        estimator: EstimatorKind,
        covariance: CovarianceModel,
    ) -> Self {
        Self {
            config,
            estimator,
            covariance,
        }
    }

    /// Draws user positions and long-term fading from `key`.
    pub fn draw<T: Real>(&self, key: StreamKey) -> Result<DropScenario<T>> {
        let mut rng = key.rng();
        let drop = drop_users(&self.config, &mut rng)?;
        let cov = CovarianceSet::generate(&self.config, &drop, self.covariance, &mut rng)?;
        let mut out = DropScenario::from_covariance(self.config.clone(), self.estimator, cov)?;
        out.drop = Some(drop);
        Ok(out)
    }
}

/// One channel realization and the estimate the BS works with.
#[derive(Debug, Clone)]
pub struct Realization<T: Real> {
    pub g: CMatrix<T>,
    pub estimate: ChannelEstimate<T>,
}

/// A scenario with fixed positions and covariances.
#[derive(Debug, Clone)]
pub struct DropScenario<T: Real> {
    pub config: SystemConfig,
    pub estimator: EstimatorKind,
    pub drop: Option<UserDrop>,
    pub cov: CovarianceSet<T>,
    mmse: Option<MmseEstimator<T>>,
}

impl<T: Real> DropScenario<T> {
    pub fn from_covariance(
        config: SystemConfig,
        estimator: EstimatorKind,
        cov: CovarianceSet<T>,
    ) -> Result<Self> {
        config.validate()?;
        if cov.len() != config.k || cov.m() != config.m {
            return Err(Error::DimensionMismatch(format!(
                "{} covariances of size {} for M={}, K={}",
                cov.len(),
                cov.m(),
                config.m,
                config.k
            )));
        }
        let mmse = match estimator {
            EstimatorKind::Mmse => Some(MmseEstimator::new(&cov, &config)?),
            _ => None,
        };
        Ok(Self {
            config,
            estimator,
            drop: None,
            cov,
            mmse,
        })
    }

    pub fn realize_with<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<Realization<T>> {
        let g = sample_channel(&self.cov, rng).g;
        let estimate = match (self.estimator, &self.mmse) {
            (EstimatorKind::True, _) => true_estimate(&g),
            (EstimatorKind::Ls, _) => {
                ls_estimate(&observe_pilots(&g, &self.config, rng), &self.config)
            }
            (EstimatorKind::Mmse, Some(f)) => f.estimate(&observe_pilots(&g, &self.config, rng)),
            (EstimatorKind::Mmse, None) => {
                unreachable!("MMSE filters are built in the constructor")
            }
        };
        Ok(Realization { g, estimate })
    }
}

impl<T: Real> ChannelSource<T> for DropScenario<T> {
    fn config(&self) -> &SystemConfig {
        &self.config
    }

    fn realize(&self, key: StreamKey) -> Result<Realization<T>> {
        self.realize_with(&mut key.rng())
    }
}

/// SE of canonical RZF and of rKA at every grid point, for one drop.
#[derive(Debug, Clone)]
pub struct DropCurves<T: Real> {
    pub grid: Vec<usize>,
    pub inits: Vec<Init>,
    pub rzf: SeEstimate<T>,
    /// Indexed `[init][grid point]`.
    pub rka: Vec<Vec<SeEstimate<T>>>,
}

/// Evaluates RZF and rKA (one run per init, read out at every grid point) on
/// the same `n_trials` realizations. Trial `i` draws from `key.child(i)`.
pub fn se_vs_iterations<T: Real, S: ChannelSource<T>>(
    source: &S,
    grid: &[usize],
    inits: &[Init],
    n_trials: usize,
    key: StreamKey,
) -> Result<DropCurves<T>> {
    if n_trials == 0 || grid.is_empty() || inits.is_empty() {
        return Err(Error::InvalidArgument(
            "need trials, grid points and inits".into(),
        ));
    }
    let cfg = source.config();
    let xi = cfg.xi();
    let per_trial: Vec<Vec<Vec<UeMoments>>> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let trial = key.child(i as u64);
            let real = source.realize(trial.child(0))?;
            let ghat = &real.estimate.ghat;
            let mut out = Vec::with_capacity(1 + inits.len() * grid.len());
            out.push(trial_moments(&rzf_combiner(ghat, T::lit(xi))?.v, &real.g)?);
            for (j, &init) in inits.iter().enumerate() {
                let opts = RkaOptions::new(1, xi).with_init(init);
                let mut rng = trial.child(1 + j as u64).rng();
                for c in rka_parl_checkpoints(ghat, &opts, grid, &mut rng)? {
                    out.push(trial_moments(&c.v, &real.g)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let k = cfg.k;
    let mut accs = vec![SinrAccumulator::new(k); 1 + inits.len() * grid.len()];
    for trial in &per_trial {
        for (acc, m) in accs.iter_mut().zip(trial) {
            acc.push_moments(m)?;
        }
    }
    let (rho, pre) = (cfg.rho_ul(), cfg.prefactor());
    let mut estimates = accs
        .iter()
        .map(|a| a.finish(rho, pre))
        .collect::<Result<Vec<SeEstimate<T>>>>()?
        .into_iter();
    let rzf = estimates.next().expect("accumulator for RZF");
    let rka = (0..inits.len())
        .map(|_| estimates.by_ref().take(grid.len()).collect())
        .collect();
    Ok(DropCurves {
        grid: grid.to_vec(),
        inits: inits.to_vec(),
        rzf,
        rka,
    })
}
