//! Randomized Kaczmarz (rKA) emulation of regularized zero-forcing receive
//! combining for single-cell massive MIMO uplinks.
//!
//! The crate is organized bottom-up:
//!
//! * [`channel`] draws user drops, long-term fading, covariance matrices and
//!   correlated Rayleigh channel realizations.
//! * [`estimation`] synthesizes orthogonal-pilot observations and produces LS
//!   and MMSE channel estimates.
//! * [`combining`] holds the canonical ZF/RZF combiners, the parallel rKA
//!   engine with hybrid or plain initialization, signal recovery and the
//!   uplink-downlink duality precoder.
//! * [`analysis`] evaluates the use-and-forget spectral efficiency bound,
//!   the average gain of the rKA and iteration counts to a tolerance.
//! * [`complexity`] counts complex multiplications per coherence block and
//!   derives the iteration budgets at which rKA stops paying off.
//!
//! Numerical code is generic over a [`Real`] scalar (`f32` or `f64`); the
//! complexity accounting is generic over any `num-traits` number so that it
//! can run in exact rational arithmetic. Concrete aliases for the common
//! choices live at the crate root.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod channel;
pub mod combining;
pub mod complexity;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod scalar;
pub mod stream;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real};
pub use stream::StreamKey;

/// Exact rational used by the complexity accounting.
pub type Rational = num_rational::Ratio<i128>;

pub type Combiner64 = combining::Combiner<f64>;
pub type Combiner32 = combining::Combiner<f32>;
pub type CovarianceSet64 = channel::CovarianceSet<f64>;
pub type CovarianceSet32 = channel::CovarianceSet<f32>;
pub type ChannelEstimate64 = estimation::ChannelEstimate<f64>;
pub type SeEstimate64 = analysis::SeEstimate<f64>;
pub type GainReport64 = analysis::GainReport<f64>;
pub type ComplexityReportExact = complexity::ComplexityReport<Rational>;
pub type ComplexityReport64 = complexity::ComplexityReport<f64>;
