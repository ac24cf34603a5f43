//! Receive combining: canonical ZF/RZF, the parallel rKA engine and the
//! uplink-downlink duality helpers.

mod canonical;
mod duality;
mod rka;

use serde::{Deserialize, Serialize};

use crate::scalar::{CMatrix, Real};

pub use canonical::{rzf_combiner, rzf_factor, zf_combiner};
pub use duality::{precode_signal, precoder_from_combiner, recover_block, recover_signals};
pub use rka::{
    rka_parl, rka_parl_checkpoints, rka_parl_traced, sample_probabilities, Init, RkaOptions,
    RkaOracle, RkaSolver, RkaState, RowSampler, Schedule, TraceRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinerMethod {
    Zf,
    Rzf,
    RkaHybrid,
    RkaPlain,
    RkaCyclic,
}

impl CombinerMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Zf => "zf",
            Self::Rzf => "rzf",
            Self::RkaHybrid => "rka_hybrid",
            Self::RkaPlain => "rka_plain",
            Self::RkaCyclic => "rka_cyclic",
        }
    }

    pub fn is_rka(self) -> bool {
        matches!(self, Self::RkaHybrid | Self::RkaPlain | Self::RkaCyclic)
    }
}

/// Combining matrix `V` with columns `v_k`.
#[derive(Debug, Clone)]
pub struct Combiner<T: Real> {
    pub v: CMatrix<T>,
    pub method: CombinerMethod,
    /// `K x K` factor with `V = Ghat D`, kept for rKA methods.
    pub d: Option<CMatrix<T>>,
}

impl<T: Real> Combiner<T> {
    pub fn k(&self) -> usize {
        self.v.ncols()
    }

    pub fn m(&self) -> usize {
        self.v.nrows()
    }
}
