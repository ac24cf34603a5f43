//! Figure and table generators.
//!
//! Random streams are keyed by scenario labels that leave out the estimator,
//! so TRUE, LS and MMSE curves of one scenario see the same drops, channels
//! and noise.

use anyhow::{bail, Result};
use rka_core::analysis::{
    gap_percentage, iterations_to_gap, sample_prob_cdf, se_vs_iterations, GapCrossing, Scenario,
};
use rka_core::channel::CovarianceModel;
use rka_core::combining::Init;
use rka_core::complexity::{saving_ratio, t_upper, t_upper_generic, tradeoff_threshold, Target};
use rka_core::estimation::EstimatorKind;
use rka_core::{Rational, StreamKey};
use serde::{Deserialize, Serialize};

use crate::spec::{Correlation, ExperimentSpec, TargetPoint};
use crate::table::{ResultTable, Schema};

/// Child key of `master` named by `label` (FNV-1a of the label bytes).
pub fn label_key(master: StreamKey, label: &str) -> StreamKey {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    master.child(h)
}

fn init_name(init: Init) -> &'static str {
    match init {
        Init::Hybrid => "hybrid",
        Init::Plain => "plain",
    }
}

/// Drop-averaged SE curves of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub grid: Vec<usize>,
    pub inits: Vec<Init>,
    pub drops: usize,
    pub se_rzf: f64,
    pub se_rzf_stderr: f64,
    /// Indexed `[init][grid point]`.
    pub se_rka: Vec<Vec<f64>>,
    pub se_rka_stderr: Vec<Vec<f64>>,
}

impl GapCurve {
    pub fn gap(&self, init: usize) -> Result<Vec<f64>> {
        self.se_rka[init]
            .iter()
            .map(|&se| Ok(gap_percentage(se, self.se_rzf)?))
            .collect()
    }

    pub fn crossing(&self, init: usize, tolerance: f64) -> Result<GapCrossing> {
        Ok(iterations_to_gap(&self.grid, &self.gap(init)?, tolerance)?)
    }
}

fn mean_and_stderr(xs: &[f64], within: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, within);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-UE SE of RZF and rKA averaged over `drops` drops of `realizations`
/// channel realizations each. Drop `d` draws its geometry from
/// `key.child(d).child(0)` and its realizations from `key.child(d).child(1)`.
pub fn gap_curve(
    scenario: &Scenario,
    grid: &[usize],
    inits: &[Init],
    drops: usize,
    realizations: usize,
    key: StreamKey,
) -> Result<GapCurve> {
    if drops == 0 {
        bail!("need at least one drop");
    }
    let mut rzf = Vec::with_capacity(drops);
    let mut rzf_within = 0.0;
    let mut rka = vec![vec![Vec::with_capacity(drops); grid.len()]; inits.len()];
    let mut rka_within = vec![vec![0.0; grid.len()]; inits.len()];
    for d in 0..drops {
        let drop_key = key.child(d as u64);
        let source = scenario.draw::<f64>(drop_key.child(0))?;
        let curves = se_vs_iterations(&source, grid, inits, realizations, drop_key.child(1))?;
        rzf.push(curves.rzf.mean_se());
        rzf_within = curves.rzf.mean_se_stderr();
        for (j, per_t) in curves.rka.iter().enumerate() {
            for (i, est) in per_t.iter().enumerate() {
                rka[j][i].push(est.mean_se());
                rka_within[j][i] = est.mean_se_stderr();
            }
        }
    }
    let (se_rzf, se_rzf_stderr) = mean_and_stderr(&rzf, rzf_within);
    let mut se_rka = Vec::new();
    let mut se_rka_stderr = Vec::new();
    for (per_t, within) in rka.iter().zip(&rka_within) {
        let (m, s): (Vec<f64>, Vec<f64>) = per_t
            .iter()
            .zip(within)
            .map(|(xs, &w)| mean_and_stderr(xs, w))
            .unzip();
        se_rka.push(m);
        se_rka_stderr.push(s);
    }
    Ok(GapCurve {
        grid: grid.to_vec(),
        inits: inits.to_vec(),
        drops,
        se_rzf,
        se_rzf_stderr,
        se_rka,
        se_rka_stderr,
    })
}

fn se_key(spec: &ExperimentSpec, loading: f64, correlation: Correlation) -> Result<StreamKey> {
    Ok(label_key(
        StreamKey::new(spec.seed()?),
        &format!("se/loading={loading}/correlation={}", correlation.name()),
    ))
}

/// Sample-probability CDFs per `(alpha, estimator, correlation)`.
pub fn run_fig1(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut table = ResultTable::new(Schema::Fig1);
    let master = StreamKey::new(spec.seed()?);
    for &alpha in &spec.sweep.alpha {
        for &correlation in &spec.sweep.correlations {
            let key = label_key(
                master,
                &format!("fig1/alpha={alpha}/correlation={}", correlation.name()),
            );
            for &estimator in &spec.sweep.estimators {
                let mut scenario = spec.scenario(None, estimator, correlation);
                scenario.config.alpha = alpha;
                let cdf =
                    sample_prob_cdf(&scenario, spec.trials.drops, spec.trials.realizations, key)?;
                for (p, f) in cdf.points() {
                    table.push(vec![
                        alpha.into(),
                        estimator.name().into(),
                        correlation.name().into(),
                        p.into(),
                        f.into(),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

/// SE versus iteration budget for HYBRID and PLAIN initialization, with the
/// canonical RZF value repeated on every row as the reference line.
pub fn run_fig2(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut table = ResultTable::new(Schema::Fig2);
    let loading = spec.system.k as f64 / spec.system.m as f64;
    let grid = spec.sweep.grid.points(spec.system.k)?;
    let inits = [Init::Hybrid, Init::Plain];
    for &correlation in &spec.sweep.correlations {
        let key = se_key(spec, loading, correlation)?;
        for &estimator in &spec.sweep.estimators {
            let scenario = spec.scenario(None, estimator, correlation);
            let curve = gap_curve(
                &scenario,
                &grid,
                &inits,
                spec.trials.drops,
                spec.trials.realizations,
                key,
            )?;
            for (j, &init) in inits.iter().enumerate() {
                for (i, &t) in grid.iter().enumerate() {
                    table.push(vec![
                        estimator.name().into(),
                        correlation.name().into(),
                        init_name(init).into(),
                        t.into(),
                        curve.se_rka[j][i].into(),
                        curve.se_rka_stderr[j][i].into(),
                        curve.se_rzf.into(),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

/// Gap curves per `(loading, estimator, correlation)` and the interpolated
/// iteration counts at every tolerance.
pub fn run_fig3_table3(
    spec: &ExperimentSpec,
    estimators: &[EstimatorKind],
) -> Result<(ResultTable, ResultTable)> {
    let mut fig3 = ResultTable::new(Schema::Fig3);
    let mut table3 = ResultTable::new(Schema::Table3);
    for &loading in &spec.sweep.loadings {
        for &correlation in &spec.sweep.correlations {
            let key = se_key(spec, loading, correlation)?;
            for &estimator in estimators {
                let scenario = spec.scenario(Some(loading), estimator, correlation);
                let grid = spec.sweep.grid.points(scenario.config.k)?;
                let curve = gap_curve(
                    &scenario,
                    &grid,
                    &[Init::Hybrid],
                    spec.trials.drops,
                    spec.trials.realizations,
                    key,
                )?;
                for (&t, gap) in grid.iter().zip(curve.gap(0)?) {
                    fig3.push(vec![
                        loading.into(),
                        estimator.name().into(),
                        correlation.name().into(),
                        t.into(),
                        gap.into(),
                    ]);
                }
                for &tol in &spec.sweep.tolerances {
                    let (t_bar, reached, last_gap) = match curve.crossing(0, tol)? {
                        GapCrossing::Reached(t) => (t, true, f64::NAN),
                        GapCrossing::Unreached { last_gap } => (f64::NAN, false, last_gap),
                    };
                    table3.push(vec![
                        loading.into(),
                        estimator.name().into(),
                        correlation.name().into(),
                        tol.into(),
                        t_bar.into(),
                        reached.into(),
                        last_gap.into(),
                    ]);
                }
            }
        }
    }
    Ok((fig3, table3))
}

/// LS gap surfaces over the antenna correlation factor at `sigma = 0`
/// (panel `r`) and over the shadowing deviation at `r = 0` (panel `sigma`).
pub fn run_fig4(spec: &ExperimentSpec) -> Result<ResultTable> {
    if spec.sweep.r.is_empty() || spec.sweep.sigma_db.is_empty() {
        bail!("fig4 needs non-empty r and sigma_db grids");
    }
    let mut table = ResultTable::new(Schema::Fig4);
    let grid = spec.sweep.grid.points(spec.system.k)?;
    let master = StreamKey::new(spec.seed()?);
    let cells = spec
        .sweep
        .r
        .iter()
        .map(|&r| ("r", r, 0.0))
        .chain(spec.sweep.sigma_db.iter().map(|&s| ("sigma", 0.0, s)));
    for (panel, r, sigma) in cells {
        let mut config = spec.system.clone();
        config.r_corr = r;
        config.sigma_sf_db = sigma;
        let scenario = Scenario::new(config, EstimatorKind::Ls, CovarianceModel::Correlated);
        let key = label_key(master, &format!("fig4/r={r}/sigma={sigma}"));
        let curve = gap_curve(
            &scenario,
            &grid,
            &[Init::Hybrid],
            spec.trials.drops,
            spec.trials.realizations,
            key,
        )?;
        for (&t, gap) in grid.iter().zip(curve.gap(0)?) {
            table.push(vec![
                panel.into(),
                r.into(),
                sigma.into(),
                t.into(),
                gap.into(),
            ]);
        }
    }
    Ok(table)
}

fn ratio(x: f64) -> Rational {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        Rational::from_integer(x as i128)
    } else {
        Rational::approximate_float(x).expect("finite value")
    }
}

fn target_for(
    targets: &[TargetPoint],
    loading: f64,
    correlation: Correlation,
    tolerance: f64,
) -> f64 {
    targets
        .iter()
        .find(|t| {
            t.correlation == correlation
                && (t.loading - loading).abs() < 1e-12
                && t.tolerance_percent == tolerance
        })
        .map_or(f64::NAN, |t| t.t_bar)
}

/// Iteration-bound curves, trade-off thresholds and saving ratios.
pub fn run_fig5(spec: &ExperimentSpec) -> Result<Vec<ResultTable>> {
    let f = &spec.fig5;
    let ms: Vec<u64> = (f.m_min..=f.m_max).step_by(f.m_step as usize).collect();
    let mut curves = ResultTable::new(Schema::Fig5);
    let mut tradeoff = ResultTable::new(Schema::Fig5Tradeoff);
    for &loading in &f.loadings {
        for &m in &ms {
            let k = ((loading * m as f64).round() as u64).max(1);
            let rzf = t_upper::<f64>(m, k, Target::Rzf)?;
            let zf = t_upper::<f64>(m, k, Target::Zf)?;
            curves.push(vec![
                loading.into(),
                m.into(),
                k.into(),
                rzf.into(),
                zf.into(),
            ]);
        }
    }
    let mut correlations: Vec<Correlation> = Vec::new();
    for t in &f.targets {
        if !correlations.contains(&t.correlation) {
            correlations.push(t.correlation);
        }
    }
    for &correlation in &correlations {
        for &loading in &f.loadings {
            let t10 = target_for(&f.targets, loading, correlation, 10.0);
            let t1 = target_for(&f.targets, loading, correlation, 1.0);
            for &m in &ms {
                let k = ((loading * m as f64).round() as u64).max(1);
                tradeoff.push(vec![
                    correlation.name().into(),
                    m.into(),
                    k.into(),
                    loading.into(),
                    t_upper::<f64>(m, k, Target::Zf)?.into(),
                    t_upper::<f64>(m, k, Target::Rzf)?.into(),
                    t10.into(),
                    t1.into(),
                ]);
            }
        }
    }

    let mut thresholds = ResultTable::new(Schema::Fig5Thresholds);
    for t in &f.targets {
        let m = tradeoff_threshold(
            ratio(t.loading),
            ratio(t.t_bar),
            Target::Rzf,
            f.k_rounding,
            1_000_000,
        )?;
        thresholds.push(vec![
            t.loading.into(),
            t.correlation.name().into(),
            t.tolerance_percent.into(),
            t.t_bar.into(),
            m.into(),
        ]);
    }

    let mut operating = ResultTable::new(Schema::Fig5Operating);
    for op in &f.operating_points {
        let (m, k) = (op.m, op.k);
        let bound = t_upper_generic(
            Rational::from_integer(m as i128),
            Rational::from_integer(k as i128),
            Target::Rzf,
        );
        let bound = *bound.numer() as f64 / *bound.denom() as f64;
        let loading = k as f64 / m as f64;
        let mut rows: Vec<(Correlation, f64, f64)> = f
            .targets
            .iter()
            .filter(|t| (t.loading - loading).abs() < 1e-12)
            .map(|t| (t.correlation, t.tolerance_percent, t.t_bar))
            .collect();
        rows.extend(
            op.t_bar
                .iter()
                .map(|t| (t.correlation, t.tolerance_percent, t.t_bar)),
        );
        for (correlation, tol, t_bar) in rows {
            operating.push(vec![
                m.into(),
                k.into(),
                correlation.name().into(),
                tol.into(),
                bound.into(),
                t_bar.into(),
                saving_ratio(bound, t_bar)?.into(),
            ]);
        }
    }
    Ok(vec![curves, tradeoff, thresholds, operating])
}

/// Looks up a numeric cell by column name.
pub fn cell_f64(table: &ResultTable, row: usize, column: &str) -> Option<f64> {
    table
        .column_index(column)
        .and_then(|c| table.rows.get(row)?.get(c)?.as_f64())
}
