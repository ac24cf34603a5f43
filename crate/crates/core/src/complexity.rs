//! Complex multiplication counts per coherence block.
//!
//! All counts are evaluated in a generic number type, so they are exact in
//! rational arithmetic ([`crate::Rational`]) and approximate in `f64`.

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number type the accounting is generic over.
pub trait Count: Num + FromPrimitive + Clone + PartialOrd + std::fmt::Debug {}

impl<N: Num + FromPrimitive + Clone + PartialOrd + std::fmt::Debug> Count for N {}

fn n<N: Count>(x: u64) -> N {
    N::from_u64(x).expect("count fits the number type")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Zf,
    Rzf,
    Rka,
}

/// Canonical scheme emulated by the rKA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Zf,
    Rzf,
}

impl From<Target> for Scheme {
    fn from(t: Target) -> Self {
        match t {
            Target::Zf => Scheme::Zf,
            Target::Rzf => Scheme::Rzf,
        }
    }
}

/// Single processing unit (FLS) or `K` parallel units (TSS). The operation
/// counts are the same; only the wall-clock interpretation differs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardwareSetting {
    #[default]
    Fls,
    Tss,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport<N> {
    pub scheme: Scheme,
    pub hardware: HardwareSetting,
    pub combining_mults: N,
    pub combining_divs: N,
    pub reception_mults: N,
    pub dl_mults: N,
    /// Sum of all counts above, divisions included.
    pub total: N,
}

impl<N: Count> ComplexityReport<N> {
    fn new(scheme: Scheme, combining_mults: N, combining_divs: N, reception_mults: N) -> Self {
        let total = combining_mults.clone() + combining_divs.clone() + reception_mults.clone();
        Self {
            scheme,
            hardware: HardwareSetting::Fls,
            combining_mults,
            combining_divs,
            reception_mults,
            dl_mults: N::zero(),
            total,
        }
    }

    pub fn with_hardware(mut self, hardware: HardwareSetting) -> Self {
        self.hardware = hardware;
        self
    }

    /// Adds the downlink precoding cost, identical for every scheme.
    pub fn with_downlink(mut self, m: u64, k: u64, tau_dl: u64) -> Self {
        let dl = dl_cost::<N>(m, k, tau_dl);
        self.total = self.total - self.dl_mults.clone() + dl.clone();
        self.dl_mults = dl;
        self
    }
}

fn check_dims(m: u64, k: u64, tau_ul: u64) -> Result<()> {
    if m == 0 || k == 0 || tau_ul == 0 {
        return Err(Error::InvalidArgument(format!(
            "M, K and tau_ul must be >= 1, got {m}, {k}, {tau_ul}"
        )));
    }
    Ok(())
}

/// `(K^3 - K) / 3`, an integer for every integer `K`.
fn cholesky_term<N: Count>(k: u64) -> N {
    let kn: N = n(k);
    (kn.clone() * kn.clone() * kn.clone() - kn) / n(3)
}

fn canonical<N: Count>(
    m: u64,
    k: u64,
    tau_ul: u64,
    km_factor: u64,
    scheme: Scheme,
) -> Result<ComplexityReport<N>> {
    check_dims(m, k, tau_ul)?;
    let (mn, kn): (N, N) = (n(m), n(k));
    let two: N = n(2);
    let combining = n::<N>(3) * kn.clone() * kn.clone() * mn.clone() / two.clone()
        + n::<N>(km_factor) * kn.clone() * mn.clone() / two
        + cholesky_term(k);
    let reception = n::<N>(tau_ul) * mn * kn.clone();
    Ok(ComplexityReport::new(scheme, combining, kn, reception))
}

/// ZF: `3K^2M/2 + KM/2 + (K^3 - K)/3` multiplications and `K` divisions.
pub fn cost_zf<N: Count>(m: u64, k: u64, tau_ul: u64) -> Result<ComplexityReport<N>> {
    canonical(m, k, tau_ul, 1, Scheme::Zf)
}

/// RZF: `3K^2M/2 + 3KM/2 + (K^3 - K)/3` multiplications and `K` divisions.
pub fn cost_rzf<N: Count>(m: u64, k: u64, tau_ul: u64) -> Result<ComplexityReport<N>> {
    canonical(m, k, tau_ul, 3, Scheme::Rzf)
}

/// Parallel rKA: `M T + 2MK` to build the combiner, `tau_ul M K + M K^2` to
/// materialize `V = Ghat D` and detect, no divisions.
pub fn cost_rka<N: Count>(m: u64, k: u64, t_rka: u64, tau_ul: u64) -> Result<ComplexityReport<N>> {
    check_dims(m, k, tau_ul)?;
    let (mn, kn): (N, N) = (n(m), n(k));
    let combining = mn.clone() * n(t_rka) + n::<N>(2) * mn.clone() * kn.clone();
    let reception = n::<N>(tau_ul) * mn.clone() * kn.clone() + mn * kn.clone() * kn;
    Ok(ComplexityReport::new(
        Scheme::Rka,
        combining,
        N::zero(),
        reception,
    ))
}

/// `MK` for the precoder normalization plus `tau_dl M K` for precoding.
pub fn dl_cost<N: Count>(m: u64, k: u64, tau_dl: u64) -> N {
    let mk: N = n(m * k);
    mk.clone() + n::<N>(tau_dl) * mk
}

/// Iteration budget at which the rKA total equals the canonical total,
/// evaluated for a possibly non-integer `K`:
///
/// ZF: `K^3/(3M) + K^2/2 + (4K - 9KM)/(6M)`,
/// RZF: `K^3/(3M) + K^2/2 + (4K - 3KM)/(6M)`.
pub fn t_upper_generic<N: Count>(m: N, k: N, target: Target) -> N {
    let c = match target {
        Target::Zf => n::<N>(9),
        Target::Rzf => n::<N>(3),
    };
    let k2 = k.clone() * k.clone();
    k2.clone() * k.clone() / (n::<N>(3) * m.clone())
        + k2 / n(2)
        + (n::<N>(4) * k.clone() - c * k * m.clone()) / (n::<N>(6) * m)
}

pub fn t_upper<N: Count>(m: u64, k: u64, target: Target) -> Result<N> {
    check_dims(m, k, 1)?;
    Ok(t_upper_generic(n(m), n(k), target))
}

/// How `K = loading * M` is formed when scanning over `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRounding {
    /// Keep the real-valued `K`.
    #[default]
    Exact,
    /// Round to the nearest integer (at least 1).
    Nearest,
}

/// Smallest `M` whose bound `t_upper(M, loading * M)` reaches `t_target`,
/// searched up to `max_m`.
pub fn tradeoff_threshold<N: Count>(
    loading: N,
    t_target: N,
    target: Target,
    rounding: KRounding,
    max_m: u64,
) -> Result<u64> {
    if !(loading > N::zero()) || loading > N::one() {
        return Err(Error::InvalidArgument(
            "loading factor must lie in (0, 1]".into(),
        ));
    }
    for m in 1..=max_m {
        let mn: N = n(m);
        let k_real = loading.clone() * mn.clone();
        let k = match rounding {
            KRounding::Exact => k_real,
            KRounding::Nearest => n(round_half_up(k_real).max(1)),
        };
        if t_upper_generic(mn, k, target) >= t_target {
            return Ok(m);
        }
    }
    Err(Error::InvalidArgument(format!(
        "bound stays below the target up to M={max_m}"
    )))
}

fn round_half_up<N: Count>(x: N) -> u64 {
    let mut lo = 0u64;
    while n::<N>(lo + 1) <= x {
        lo += 1;
    }
    let half = n::<N>(1) / n(2);
    if x - n::<N>(lo) >= half {
        lo + 1
    } else {
        lo
    }
}

/// `t_upper / t_bar`, the factor by which rKA undercuts the canonical scheme.
pub fn saving_ratio(t_upper: f64, t_bar: f64) -> Result<f64> {
    if !(t_bar > 0.0) {
        return Err(Error::InvalidArgument(
            "iteration count must be positive".into(),
        ));
    }
    Ok(t_upper / t_bar)
}
