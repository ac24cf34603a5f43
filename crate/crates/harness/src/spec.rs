//! Experiment configuration.
//!
//! Specs are TOML documents with dotted sections. Every key has a built-in
//! default, so an empty file describes the default dense-urban scenario.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rka_core::analysis::Scenario;
use rka_core::channel::{CovarianceModel, SystemConfig};
use rka_core::complexity::KRounding;
use rka_core::estimation::EstimatorKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SEED_ENV: &str = "RKA_SEED";

/// Named spatial-correlation setting of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    /// `R = beta I`, no shadowing.
    Off,
    /// Exponential correlation with `r = 0.5` and 4 dB per-antenna shadowing.
    Moderate,
    /// `R = beta 10^(f/10) I` with the configured shadowing deviation.
    Shadowed,
    /// Exponential correlation with the configured `r_corr` and shadowing.
    Correlated,
}

impl Correlation {
    pub fn name(self) -> &'static str {
        match self {
            Self::Off => "off",
            Self::Moderate => "moderate",
            Self::Shadowed => "shadowed",
            Self::Correlated => "correlated",
        }
    }

    /// Applies the preset to `base` and returns the matching covariance model.
    pub fn apply(self, base: &SystemConfig) -> (SystemConfig, CovarianceModel) {
        let mut cfg = base.clone();
        let model = match self {
            Self::Off => {
                cfg.sigma_sf_db = 0.0;
                CovarianceModel::Uncorrelated
            }
            Self::Moderate => {
                cfg.r_corr = 0.5;
                cfg.sigma_sf_db = 4.0;
                CovarianceModel::Correlated
            }
            Self::Shadowed => CovarianceModel::Uncorrelated,
            Self::Correlated => CovarianceModel::Correlated,
        };
        (cfg, model)
    }
}

impl FromStr for Correlation {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "off" | "uncorrelated" => Self::Off,
            "moderate" => Self::Moderate,
            "shadowed" => Self::Shadowed,
            "correlated" => Self::Correlated,
            other => bail!("unknown correlation mode `{other}`"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Trials {
    pub drops: usize,
    /// Channel realizations per drop.
    pub realizations: usize,
}

impl Default for Trials {
    fn default() -> Self {
        Self {
            drops: 50,
            realizations: 200,
        }
    }
}

/// Iteration-count grid, either explicit or `0, step, 2 step, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IterationGrid {
    pub t_grid: Option<Vec<usize>>,
    pub t_step: usize,
    pub t_max: usize,
    /// Extends the regular grid to at least `t_max_k2 * K^2` for larger K.
    pub t_max_k2: f64,
}

impl Default for IterationGrid {
    fn default() -> Self {
        Self {
            t_grid: None,
            t_step: 100,
            t_max: 800,
            t_max_k2: 3.0,
        }
    }
}

impl IterationGrid {
    pub fn points(&self, k: usize) -> Result<Vec<usize>> {
        if let Some(grid) = &self.t_grid {
            if grid.is_empty() {
                bail!("t_grid is empty");
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                bail!("t_grid must be strictly increasing");
            }
            return Ok(grid.clone());
        }
        if self.t_step == 0 {
            bail!("t_step must be positive");
        }
        let wanted = (self.t_max as f64).max(self.t_max_k2 * (k * k) as f64);
        let last = (wanted / self.t_step as f64).ceil() as usize * self.t_step;
        Ok((0..=last).step_by(self.t_step).collect())
    }
}

/// Iteration count reported for one Table III cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetPoint {
    pub loading: f64,
    pub correlation: Correlation,
    pub tolerance_percent: f64,
    pub t_bar: f64,
}

fn table3_targets() -> Vec<TargetPoint> {
    let rows = [
        (0.1, [93.0, 95.0], [293.0, 333.0]),
        (0.3, [589.0, 655.0], [1815.0, 1903.0]),
        (0.5, [1799.0, 1983.0], [4960.0, 5062.0]),
    ];
    let mut out = Vec::new();
    for (loading, ten, one) in rows {
        for (tolerance_percent, pair) in [(10.0, ten), (1.0, one)] {
            for (correlation, t_bar) in [Correlation::Off, Correlation::Moderate]
                .into_iter()
                .zip(pair)
            {
                out.push(TargetPoint {
                    loading,
                    correlation,
                    tolerance_percent,
                    t_bar,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotedTarget {
    pub correlation: Correlation,
    pub tolerance_percent: f64,
    pub t_bar: f64,
}

/// System size at which saving ratios are reported, against every target
/// with `loading = K / M` plus the listed extra iteration counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPoint {
    pub m: u64,
    pub k: u64,
    #[serde(default)]
    pub t_bar: Vec<QuotedTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig5 {
    pub loadings: Vec<f64>,
    pub m_min: u64,
    pub m_max: u64,
    pub m_step: u64,
    pub k_rounding: KRounding,
    pub targets: Vec<TargetPoint>,
    pub operating_points: Vec<OperatingPoint>,
}

impl Default for Fig5 {
    fn default() -> Self {
        Self {
            loadings: vec![0.1, 0.3, 0.5],
            m_min: 10,
            m_max: 600,
            m_step: 1,
            k_rounding: KRounding::Exact,
            targets: table3_targets(),
            operating_points: vec![OperatingPoint {
                m: 200,
                k: 100,
                t_bar: vec![QuotedTarget {
                    correlation: Correlation::Moderate,
                    tolerance_percent: 10.0,
                    t_bar: 1953.0,
                }],
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    #[serde(flatten)]
    pub grid: IterationGrid,
    pub alpha: Vec<f64>,
    pub estimators: Vec<EstimatorKind>,
    pub correlations: Vec<Correlation>,
    pub loadings: Vec<f64>,
    pub tolerances: Vec<f64>,
    /// Antenna correlation factors of the first Fig. 4 panel (`sigma = 0`).
    pub r: Vec<f64>,
    /// Shadowing deviations of the second Fig. 4 panel (`r = 0`).
    pub sigma_db: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            grid: IterationGrid::default(),
            alpha: vec![2.0, 4.0],
            estimators: vec![EstimatorKind::True, EstimatorKind::Ls, EstimatorKind::Mmse],
            correlations: vec![Correlation::Off, Correlation::Moderate],
            loadings: vec![0.1, 0.3],
            tolerances: vec![10.0, 1.0],
            r: vec![0.0, 0.3, 0.5, 0.7, 0.9],
            sigma_db: vec![0.0, 2.0, 4.0, 6.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub system: SystemConfig,
    pub trials: Trials,
    pub sweep: Sweep,
    pub fig5: Fig5,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            seed: None,
            output_dir: PathBuf::from("results"),
            system: SystemConfig::default(),
            trials: Trials::default(),
            sweep: Sweep::default(),
            fig5: Fig5::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).context("parsing experiment spec")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Resolves the master seed: explicit flag, then `RKA_SEED`, then the
    /// spec file. There is no clock-based fallback.
    pub fn resolve_seed(&mut self, flag: Option<u64>) -> Result<u64> {
        let env = match std::env::var(SEED_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<u64>()
                    .with_context(|| format!("{SEED_ENV}={v}"))?,
            ),
            Err(_) => None,
        };
        let seed = flag.or(env).or(self.seed).with_context(|| {
            format!("a seed is required: pass --seed, set {SEED_ENV} or add `seed` to the spec")
        })?;
        self.seed = Some(seed);
        Ok(seed)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.context("seed not resolved")
    }

    /// SHA-256 of the resolved spec serialized as TOML, leaving out the
    /// output directory.
    pub fn digest(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let bytes = Sha256::digest(canonical.to_toml()?.as_bytes());
        Ok(bytes.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        let s = &self.sweep;
        let lists = [
            ("alpha", s.alpha.is_empty()),
            ("estimators", s.estimators.is_empty()),
            ("correlations", s.correlations.is_empty()),
            ("loadings", s.loadings.is_empty()),
            ("tolerances", s.tolerances.is_empty()),
            ("r", s.r.is_empty()),
            ("sigma_db", s.sigma_db.is_empty()),
            ("fig5.loadings", self.fig5.loadings.is_empty()),
        ];
        for (name, empty) in lists {
            if empty {
                bail!("sweep grid `{name}` is empty");
            }
        }
        if self.trials.drops == 0 || self.trials.realizations == 0 {
            bail!("trials.drops and trials.realizations must be positive");
        }
        if s.loadings
            .iter()
            .chain(&self.fig5.loadings)
            .any(|&l| !(l > 0.0 && l <= 1.0))
        {
            bail!("loading factors must lie in (0, 1]");
        }
        if s.tolerances.iter().any(|&t| !(t > 0.0 && t <= 100.0)) {
            bail!("tolerances must lie in (0, 100]");
        }
        if self.fig5.m_step == 0 || self.fig5.m_min == 0 || self.fig5.m_min > self.fig5.m_max {
            bail!("fig5 antenna range is empty");
        }
        s.grid.points(self.system.k)?;
        Ok(())
    }

    /// Scenario at loading `k / m` with the spec's system parameters.
    pub fn scenario(
        &self,
        loading: Option<f64>,
        estimator: EstimatorKind,
        correlation: Correlation,
    ) -> Scenario {
        let mut base = self.system.clone();
        if let Some(l) = loading {
            base.k = ((l * base.m as f64).round() as usize).max(1);
        }
        let (cfg, model) = correlation.apply(&base);
        Scenario::new(cfg, estimator, model)
    }
}
