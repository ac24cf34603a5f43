//! Parallel randomized Kaczmarz emulation of the RZF combiner.
//!
//! UE `k` solves `B^H c = e_k` with `B^H = [Ghat^H, sqrt(xi) I_K]` and
//! `c = [u; sqrt(xi) z]`. Only the `K` rows of `Ghat^H` are sampled and the
//! `sqrt(xi)` part is folded into the `z` update, so `u = Ghat z` at every
//! iteration and the combiner column is `v_k = Ghat d_k` with `d_k = z`.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, cabs, CMatrix, CVector, Real};

use super::canonical::rzf_factor;
use super::{Combiner, CombinerMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// First iteration of UE `k` picks row `k`.
    Hybrid,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Randomized,
    /// Classical Kaczmarz sweep, row `t mod K`.
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RkaOptions {
    pub iterations: usize,
    pub xi: f64,
    pub init: Init,
    pub schedule: Schedule,
    /// All UEs consume one common row stream instead of one stream each.
    pub shared_rows: bool,
}

impl RkaOptions {
    /// Hybrid, randomized, independent streams.
    pub fn new(iterations: usize, xi: f64) -> Self {
        Self {
            iterations,
            xi,
            init: Init::Hybrid,
            schedule: Schedule::Randomized,
            shared_rows: false,
        }
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_shared_rows(mut self, shared: bool) -> Self {
        self.shared_rows = shared;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument(
                "rKA needs at least one iteration".into(),
            ));
        }
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "regularization {} must be >= 0",
                self.xi
            )));
        }
        Ok(())
    }

    pub fn method(&self) -> CombinerMethod {
        match (self.schedule, self.init) {
            (Schedule::Cyclic, _) => CombinerMethod::RkaCyclic,
            (Schedule::Randomized, Init::Hybrid) => CombinerMethod::RkaHybrid,
            (Schedule::Randomized, Init::Plain) => CombinerMethod::RkaPlain,
        }
    }
}

/// `P_r = (||ghat_r||^2 + xi) / (||Ghat||_F^2 + K xi)`.
pub fn sample_probabilities<T: Real>(ghat: &CMatrix<T>, xi: T) -> Result<Vec<T>> {
    if ghat.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let weights: Vec<T> = ghat.column_iter().map(|g| g.norm_squared() + xi).collect();
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    if !(total > T::zero()) {
        return Err(Error::DegenerateProbabilities);
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Inverse-CDF sampler over a fixed probability vector.
#[derive(Debug, Clone)]
pub struct RowSampler {
    cdf: Vec<f64>,
    last: usize,
}

impl RowSampler {
    pub fn new<T: Real>(p: &[T]) -> Result<Self> {
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(p.len());
        let mut last = None;
        for (i, &x) in p.iter().enumerate() {
            let x = x.as_f64();
            if !(x >= 0.0) {
                return Err(Error::InvalidArgument(format!("probability {i} is {x}")));
            }
            if x > 0.0 {
                last = Some(i);
            }
            acc += x;
            cdf.push(acc);
        }
        let last = last.ok_or(Error::DegenerateProbabilities)?;
        Ok(Self { cdf, last })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        self.cdf.partition_point(|&c| c <= u).min(self.last)
    }
}

/// Per-UE state `(u, z)` after `t` iterations.
#[derive(Debug, Clone)]
pub struct RkaState<T: Real> {
    pub u: CVector<T>,
    pub z: CVector<T>,
    pub t: usize,
    pub row_log: Vec<usize>,
}

impl<T: Real> RkaState<T> {
    pub fn zeros(m: usize, k: usize) -> Self {
        Self {
            u: CVector::zeros(m),
            z: CVector::zeros(k),
            t: 0,
            row_log: Vec::new(),
        }
    }
}

/// Precomputed row norms and sampling table for one estimated channel.
#[derive(Debug, Clone)]
pub struct RkaSolver<'a, T: Real> {
    ghat: &'a CMatrix<T>,
    xi: T,
    denom: Vec<T>,
    probabilities: Vec<T>,
    sampler: RowSampler,
}

impl<'a, T: Real> RkaSolver<'a, T> {
    pub fn new(ghat: &'a CMatrix<T>, xi: T) -> Result<Self> {
        if ghat.ncols() == 0 {
            return Err(Error::InvalidArgument("no UEs".into()));
        }
        let probabilities = sample_probabilities(ghat, xi)?;
        let sampler = RowSampler::new(&probabilities)?;
        let denom = ghat.column_iter().map(|g| g.norm_squared() + xi).collect();
        Ok(Self {
            ghat,
            xi,
            denom,
            probabilities,
            sampler,
        })
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn k(&self) -> usize {
        self.ghat.ncols()
    }

    /// Row used by UE `k` at iteration `t` (0-based).
    pub fn row<R: Rng + ?Sized>(
        &self,
        k: usize,
        t: usize,
        opts: &RkaOptions,
        rng: &mut R,
    ) -> usize {
        if t == 0 && opts.init == Init::Hybrid {
            return k;
        }
        match opts.schedule {
            Schedule::Cyclic => t % self.k(),
            Schedule::Randomized => self.sampler.draw(rng),
        }
    }

    /// Projects UE `k`'s state onto row `r` and returns the residual `eta`.
    pub fn step(&self, state: &mut RkaState<T>, k: usize, r: usize) -> Complex<T> {
        let den = self.denom[r];
        let eta = if den > T::zero() {
            let g = self.ghat.column(r);
            let target: Complex<T> = if r == k {
                Complex::one()
            } else {
                Complex::zero()
            };
            let eta = (target - g.dotc(&state.u) - state.z[r] * c(self.xi)) / c(den);
            state.u.axpy(eta, &g, Complex::one());
            state.z[r] += eta;
            eta
        } else {
            Complex::zero()
        };
        state.t += 1;
        state.row_log.push(r);
        eta
    }

    /// Runs `opts.iterations` steps for UE `k`, calling `observe` after each.
    pub fn solve<R, F>(
        &self,
        k: usize,
        opts: &RkaOptions,
        rng: &mut R,
        mut observe: F,
    ) -> RkaState<T>
    where
        R: Rng + ?Sized,
        F: FnMut(&RkaState<T>, usize, Complex<T>),
    {
        let mut state = RkaState::zeros(self.ghat.nrows(), self.k());
        state.row_log.reserve(opts.iterations);
        for t in 0..opts.iterations {
            let r = self.row(k, t, opts, rng);
            let eta = self.step(&mut state, k, r);
            observe(&state, r, eta);
        }
        state
    }
}

fn ue_stream(base: u64, k: usize, shared: bool) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(if shared { 0 } else { k as u64 + 1 });
    rng
}

fn prepare<'a, T: Real, R: Rng + ?Sized>(
    ghat: &'a CMatrix<T>,
    opts: &RkaOptions,
    rng: &mut R,
) -> Result<(RkaSolver<'a, T>, u64)> {
    opts.validate()?;
    let solver = RkaSolver::new(ghat, T::lit(opts.xi))?;
    Ok((solver, rng.random::<u64>()))
}

/// Algorithm output `V = Ghat D` after `opts.iterations` steps per UE.
pub fn rka_parl<T: Real, R: Rng + ?Sized>(
    ghat: &CMatrix<T>,
    opts: &RkaOptions,
    rng: &mut R,
) -> Result<Combiner<T>> {
    let (solver, base) = prepare(ghat, opts, rng)?;
    let k = ghat.ncols();
    let mut d = CMatrix::zeros(k, k);
    for ue in 0..k {
        let state = solver.solve(
            ue,
            opts,
            &mut ue_stream(base, ue, opts.shared_rows),
            |_, _, _| {},
        );
        d.set_column(ue, &state.z);
    }
    Ok(Combiner {
        v: ghat * &d,
        method: opts.method(),
        d: Some(d),
    })
}

/// One run up to the largest checkpoint; returns the combiner after each
/// checkpoint. Each entry equals `rka_parl` with that iteration budget and
/// the same random stream; a checkpoint at 0 yields the all-zero combiner.
/// `opts.iterations` is ignored.
pub fn rka_parl_checkpoints<T: Real, R: Rng + ?Sized>(
    ghat: &CMatrix<T>,
    opts: &RkaOptions,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<Vec<Combiner<T>>> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    let run = RkaOptions {
        iterations: checkpoints[checkpoints.len() - 1].max(1),
        ..*opts
    };
    let (solver, base) = prepare(ghat, &run, rng)?;
    let k = ghat.ncols();
    let mut ds = vec![CMatrix::zeros(k, k); checkpoints.len()];
    for ue in 0..k {
        let mut next = usize::from(checkpoints[0] == 0);
        solver.solve(
            ue,
            &run,
            &mut ue_stream(base, ue, run.shared_rows),
            |state, _, _| {
                while next < checkpoints.len() && checkpoints[next] == state.t {
                    ds[next].set_column(ue, &state.z);
                    next += 1;
                }
            },
        );
    }
    Ok(ds
        .into_iter()
        .map(|d| Combiner {
            v: ghat * &d,
            method: opts.method(),
            d: Some(d),
        })
        .collect())
}

/// Closed-form fixed point `d_k = (Ghat^H Ghat + xi I)^{-1} e_k`, `v_k = Ghat d_k`.
#[derive(Debug, Clone)]
pub struct RkaOracle<T: Real> {
    pub d: CMatrix<T>,
    pub v: CMatrix<T>,
    pub xi: T,
}

impl<T: Real> RkaOracle<T> {
    pub fn new(ghat: &CMatrix<T>, xi: T) -> Result<Self> {
        let d = rzf_factor(ghat, xi)?;
        Ok(Self {
            v: ghat * &d,
            d,
            xi,
        })
    }

    /// `||c - c*||` with `c = [u; sqrt(xi) z]`, or `[u; z]` when `xi = 0`.
    pub fn gap(&self, state: &RkaState<T>, k: usize) -> T {
        let w = if self.xi > T::zero() {
            self.xi
        } else {
            T::one()
        };
        let du = (&state.u - self.v.column(k)).norm_squared();
        let dz = (&state.z - self.d.column(k)).norm_squared();
        (du + w * dz).sqrt()
    }

    /// Gap of the all-zero starting point.
    pub fn initial_gap(&self, k: usize) -> T {
        let w = if self.xi > T::zero() {
            self.xi
        } else {
            T::one()
        };
        (self.v.column(k).norm_squared() + w * self.d.column(k).norm_squared()).sqrt()
    }
}

/// One row of the per-iteration trace, `t` counted after the update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: usize,
    pub k: usize,
    pub r: usize,
    pub abs_eta: f64,
    pub gap: Option<f64>,
}

pub fn rka_parl_traced<T: Real, R: Rng + ?Sized>(
    ghat: &CMatrix<T>,
    opts: &RkaOptions,
    oracle: Option<&RkaOracle<T>>,
    rng: &mut R,
) -> Result<(Combiner<T>, Vec<TraceRecord>)> {
    let (solver, base) = prepare(ghat, opts, rng)?;
    let k = ghat.ncols();
    let mut d = CMatrix::zeros(k, k);
    let mut trace = Vec::with_capacity(k * opts.iterations);
    for ue in 0..k {
        let state = solver.solve(
            ue,
            opts,
            &mut ue_stream(base, ue, opts.shared_rows),
            |s, r, eta| {
                trace.push(TraceRecord {
                    t: s.t,
                    k: ue,
                    r,
                    abs_eta: cabs(eta).as_f64(),
                    gap: oracle.map(|o| o.gap(s, ue).as_f64()),
                });
            },
        );
        d.set_column(ue, &state.z);
    }
    let combiner = Combiner {
        v: ghat * &d,
        method: opts.method(),
        d: Some(d),
    };
    Ok((combiner, trace))
}
