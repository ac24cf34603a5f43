use rayon::prelude::*;

use crate::combining::{RkaOptions, RkaOracle, RkaSolver};
use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};
use crate::stream::StreamKey;

/// `100 (SE_rzf - SE_rka) / SE_rzf`.
pub fn gap_percentage(se_rka: f64, se_canonical: f64) -> Result<f64> {
    if !(se_canonical > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "canonical SE must be positive, got {se_canonical}"
        )));
    }
    Ok(100.0 * (se_canonical - se_rka) / se_canonical)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapCrossing {
    /// Interpolated iteration count at which the gap reaches the tolerance.
    Reached(f64),
    Unreached {
        last_gap: f64,
    },
}

impl GapCrossing {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Reached(t) => Some(t),
            Self::Unreached { .. } => None,
        }
    }
}

/// First crossing of `gaps` below `tolerance`, linearly interpolated between
/// neighboring grid points.
pub fn iterations_to_gap(grid: &[usize], gaps: &[f64], tolerance: f64) -> Result<GapCrossing> {
    if grid.is_empty() || grid.len() != gaps.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} grid points, {} gaps",
            grid.len(),
            gaps.len()
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "grid must be strictly increasing".into(),
        ));
    }
    if !(tolerance > 0.0 && tolerance <= 100.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tolerance}% outside (0, 100]"
        )));
    }
    if gaps[0] <= tolerance {
        return Ok(GapCrossing::Reached(grid[0] as f64));
    }
    for i in 1..grid.len() {
        if gaps[i] <= tolerance {
            let (t0, t1) = (grid[i - 1] as f64, grid[i] as f64);
            let frac = (gaps[i - 1] - tolerance) / (gaps[i - 1] - gaps[i]);
            return Ok(GapCrossing::Reached(t0 + (t1 - t0) * frac));
        }
    }
    Ok(GapCrossing::Unreached {
        last_gap: gaps[gaps.len() - 1],
    })
}

/// Seed-averaged squared gap to the fixed point, summed over UEs.
#[derive(Debug, Clone)]
pub struct GapTrace {
    /// Entry `t` is the mean of `sum_k ||c_k^t - c_k*||^2`, `t = 0..=T`.
    pub mean_sq_gap: Vec<f64>,
    pub initial_sq_gap: f64,
    pub seeds: usize,
}

pub fn mean_squared_gap_trace<T: Real>(
    ghat: &CMatrix<T>,
    opts: &RkaOptions,
    n_seeds: usize,
    key: StreamKey,
) -> Result<GapTrace> {
    opts.validate()?;
    if n_seeds == 0 {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    let xi = T::lit(opts.xi);
    let oracle = RkaOracle::new(ghat, xi)?;
    let solver = RkaSolver::new(ghat, xi)?;
    let k = ghat.ncols();
    let initial_sq_gap: f64 = (0..k)
        .map(|ue| oracle.initial_gap(ue).as_f64().powi(2))
        .sum();
    let traces: Vec<Vec<f64>> = (0..n_seeds)
        .into_par_iter()
        .map(|s| {
            let mut acc = vec![0.0; opts.iterations + 1];
            acc[0] = initial_sq_gap;
            for ue in 0..k {
                let mut rng = key.child(s as u64).child(ue as u64).rng();
                solver.solve(ue, opts, &mut rng, |state, _, _| {
                    acc[state.t] += oracle.gap(state, ue).as_f64().powi(2);
                });
            }
            acc
        })
        .collect();
    let mut mean = vec![0.0; opts.iterations + 1];
    for t in &traces {
        for (m, x) in mean.iter_mut().zip(t) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n_seeds as f64;
    }
    Ok(GapTrace {
        mean_sq_gap: mean,
        initial_sq_gap,
        seeds: n_seeds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub pass: bool,
    /// `min_t bound_t / observed_t` over the checked iterations.
    pub margin: f64,
    pub worst_t: usize,
    pub checked: usize,
}

/// Compares `mean_sq_gap[t]` with `(1 - kappa)^t * initial_sq_gap`.
///
/// Passes when the observed value stays below `slack` times the bound.
/// Iterations whose observed value is below `1e-20 * initial_sq_gap` are
/// at the floating-point floor and are not checked.
pub fn convergence_bound_check(
    mean_sq_gap: &[f64],
    kappa: f64,
    initial_sq_gap: f64,
    slack: f64,
) -> Result<BoundCheck> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa {kappa} outside (0, 1]"
        )));
    }
    if !(slack >= 1.0) || !(initial_sq_gap >= 0.0) {
        return Err(Error::InvalidArgument(
            "slack must be >= 1 and gap >= 0".into(),
        ));
    }
    let floor = 1e-20 * initial_sq_gap;
    let mut margin = f64::INFINITY;
    let mut worst_t = 0;
    let mut checked = 0;
    for (t, &obs) in mean_sq_gap.iter().enumerate() {
        if obs <= floor {
            continue;
        }
        checked += 1;
        let bound = (1.0 - kappa).powi(t as i32) * initial_sq_gap;
        let ratio = bound / obs;
        if ratio < margin {
            margin = ratio;
            worst_t = t;
        }
    }
    Ok(BoundCheck {
        pass: margin * slack >= 1.0,
        margin,
        worst_t,
        checked,
    })
}
