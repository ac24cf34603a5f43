//! Spectral efficiency, average gain and convergence metrics.

mod cdf;
mod convergence;
mod gain;
mod montecarlo;
mod se;

pub use cdf::{averaged_probabilities, sample_prob_cdf, EmpiricalCdf};
pub use convergence::{
    convergence_bound_check, gap_percentage, iterations_to_gap, mean_squared_gap_trace, BoundCheck,
    GapCrossing, GapTrace,
};
pub use gain::{
    average_gain_closed, average_gain_generic, b_hermitian, remark_bounds, GainReport, RemarkBounds,
};
pub use montecarlo::{se_vs_iterations, DropCurves, DropScenario, Realization, Scenario};
pub use se::{
    sinr_se_montecarlo, trial_moments, ChannelSource, SeEstimate, SinrAccumulator, UeMoments,
};
