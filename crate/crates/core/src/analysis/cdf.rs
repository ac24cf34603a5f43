use rayon::prelude::*;

use crate::combining::sample_probabilities;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stream::StreamKey;

use super::montecarlo::Scenario;
use super::se::ChannelSource;

/// Sorted sample with the usual right-continuous empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(value, fraction <= value)` for every sample point.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.values.len() as f64;
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, (i + 1) as f64 / n))
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    pub fn median(&self) -> f64 {
        let n = self.values.len();
        if n % 2 == 1 {
            self.values[n / 2]
        } else {
            0.5 * (self.values[n / 2 - 1] + self.values[n / 2])
        }
    }
}

/// Per-UE sample probabilities averaged over `n_realizations` estimates.
pub fn averaged_probabilities<T: Real, S: ChannelSource<T>>(
    source: &S,
    n_realizations: usize,
    key: StreamKey,
) -> Result<Vec<f64>> {
    if n_realizations == 0 {
        return Err(Error::InvalidArgument(
            "need at least one realization".into(),
        ));
    }
    let xi = T::lit(source.config().xi());
    let mut mean = vec![0.0; source.config().k];
    for i in 0..n_realizations {
        let real = source.realize(key.child(i as u64))?;
        for (m, p) in mean
            .iter_mut()
            .zip(sample_probabilities(&real.estimate.ghat, xi)?)
        {
            *m += p.as_f64();
        }
    }
    for m in &mut mean {
        *m /= n_realizations as f64;
    }
    Ok(mean)
}

/// Pools the averaged sample probabilities of every UE over `n_drops` drops.
/// Drop `d` uses `key.child(d)`.
pub fn sample_prob_cdf(
    scenario: &Scenario,
    n_drops: usize,
    n_realizations: usize,
    key: StreamKey,
) -> Result<EmpiricalCdf> {
    if n_drops == 0 {
        return Err(Error::InvalidArgument("need at least one drop".into()));
    }
    let pooled: Vec<Vec<f64>> = (0..n_drops)
        .into_par_iter()
        .map(|d| {
            let drop_key = key.child(d as u64);
            let drop = scenario.draw::<f64>(drop_key.child(0))?;
            averaged_probabilities(&drop, n_realizations, drop_key.child(1))
        })
        .collect::<Result<_>>()?;
    EmpiricalCdf::new(pooled.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_basics() {
        let c = EmpiricalCdf::new(vec![0.3, 0.1, 0.2, 0.4]).unwrap();
        assert_eq!(c.median(), 0.25);
        assert_eq!(c.eval(0.2), 0.5);
        assert_eq!(c.points().last().unwrap(), &(0.4, 1.0));
        assert!(EmpiricalCdf::new(vec![]).is_err());
    }
}
