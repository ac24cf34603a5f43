use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SystemConfig, UserDrop};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, max_abs, trace_re, HermitianSpectrum};
use crate::scalar::{c, CMatrix, Real};

/// Spatial covariance model for the UE channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceModel {
    /// `R = beta 10^(f/10) I` with one shadowing draw per UE.
    Uncorrelated,
    /// Exponential ULA correlation with per-antenna shadowing.
    Correlated,
}

/// Relative PSD tolerance applied before clipping.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) enum Factor<T: Real> {
    /// `R = v I`.
    ScaledIdentity(T),
    /// `L` with `L L^H = R`.
    Dense(CMatrix<T>),
}

/// One UE's covariance with the long-term draws that produced it.
#[derive(Debug, Clone)]
pub struct CovarianceEntry<T: Real> {
    pub r: CMatrix<T>,
    pub beta_db: f64,
    pub shadow_db: Vec<f64>,
    /// Smallest eigenvalue before clipping (dense entries only).
    pub min_eigenvalue: Option<T>,
    factor: Factor<T>,
}

impl<T: Real> CovarianceEntry<T> {
    /// Validates a caller-supplied Hermitian PSD matrix.
    pub fn from_matrix(r: CMatrix<T>, index: usize) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "covariance {index} is {}x{}",
                r.nrows(),
                r.ncols()
            )));
        }
        let scale = max_abs(&r);
        let defect = hermitian_defect(&r);
        if defect > T::lit(1e-12) * scale {
            return Err(Error::NotHermitian {
                index,
                defect: defect.as_f64(),
            });
        }
        if let Some(v) = scaled_identity_value(&r) {
            if v < T::zero() {
                return Err(Error::NotPsd {
                    index,
                    min_eigenvalue: v.as_f64(),
                    tolerance: 0.0,
                });
            }
            return Ok(Self {
                r,
                beta_db: f64::NAN,
                shadow_db: Vec::new(),
                min_eigenvalue: None,
                factor: Factor::ScaledIdentity(v),
            });
        }
        let (r, factor, min_eig) = psd_factor(r, index)?;
        Ok(Self {
            r,
            beta_db: f64::NAN,
            shadow_db: Vec::new(),
            min_eigenvalue: Some(min_eig),
            factor,
        })
    }

    pub(crate) fn factor(&self) -> &Factor<T> {
        &self.factor
    }

    pub fn is_scaled_identity(&self) -> bool {
        matches!(self.factor, Factor::ScaledIdentity(_))
    }

    /// PSD square root `L` with `L L^H = R`.
    pub fn sqrt_factor(&self) -> CMatrix<T> {
        match &self.factor {
            Factor::ScaledIdentity(v) => {
                let n = self.r.nrows();
                CMatrix::from_diagonal_element(n, n, c(v.sqrt()))
            }
            Factor::Dense(l) => l.clone(),
        }
    }
}

fn scaled_identity_value<T: Real>(r: &CMatrix<T>) -> Option<T> {
    let n = r.nrows();
    let v = r[(0, 0)];
    for j in 0..n {
        for i in 0..n {
            let want = if i == j {
                v
            } else {
                Complex::new(T::zero(), T::zero())
            };
            if r[(i, j)] != want {
                return None;
            }
        }
    }
    (v.im == T::zero()).then_some(v.re)
}

fn psd_tolerance<T: Real>(r: &CMatrix<T>) -> T {
    let rel = T::lit(PSD_TOLERANCE).max(T::default_epsilon() * T::lit(100.0));
    rel * trace_re(r).abs() / T::lit(r.nrows() as f64)
}

/// Eigen-based PSD square root, clipping eigenvalues that are negative only
/// through round-off.
fn psd_factor<T: Real>(r: CMatrix<T>, index: usize) -> Result<(CMatrix<T>, Factor<T>, T)> {
    let tol = psd_tolerance(&r);
    let mut spec = HermitianSpectrum::new(&r);
    let min_eig = spec.min();
    if min_eig < -tol {
        return Err(Error::NotPsd {
            index,
            min_eigenvalue: min_eig.as_f64(),
            tolerance: -tol.as_f64(),
        });
    }
    let r = if min_eig < T::zero() {
        spec.clip_negative();
        spec.reconstruct()
    } else {
        r
    };
    Ok((r, Factor::Dense(spec.sqrt_factor()), min_eig))
}

/// `R_k = beta_k 10^(f/10) I_M` with `f ~ N(0, sigma^2)` dB.
pub fn covariance_uncorrelated<T: Real, R: Rng + ?Sized>(
    beta_db: f64,
    sigma_sf_db: f64,
    m: usize,
    rng: &mut R,
) -> CovarianceEntry<T> {
    let f = sigma_sf_db * f64::standard_normal(rng);
    let var = 10f64.powf(beta_db / 10.0) * 10f64.powf(f / 10.0);
    CovarianceEntry {
        r: CMatrix::from_diagonal_element(m, m, c(T::lit(var))),
        beta_db,
        shadow_db: vec![f],
        min_eigenvalue: None,
        factor: Factor::ScaledIdentity(T::lit(var)),
    }
}

/// `[R]_{m,n} = beta r^|n-m| e^{i (n-m) theta} 10^((f_m + f_n)/20)` with
/// i.i.d. per-antenna shadowing `f_m ~ N(0, sigma^2)` dB.
pub fn covariance_correlated<T: Real, R: Rng + ?Sized>(
    beta_db: f64,
    r_corr: f64,
    theta: f64,
    sigma_sf_db: f64,
    m: usize,
    rng: &mut R,
) -> Result<CovarianceEntry<T>> {
    if !(0.0..=1.0).contains(&r_corr) {
        return Err(Error::CorrelationOutOfRange(r_corr));
    }
    let shadow: Vec<f64> = (0..m)
        .map(|_| sigma_sf_db * f64::standard_normal(rng))
        .collect();
    let beta = 10f64.powf(beta_db / 10.0);
    let mut r = CMatrix::<T>::zeros(m, m);
    for col in 0..m {
        for row in 0..=col {
            let lag = (col - row) as i32;
            let phase = Complex::from_polar(1.0, lag as f64 * theta);
            let gain = 10f64.powf((shadow[row] + shadow[col]) / 20.0);
            let v = phase * (beta * r_corr.powi(lag) * gain);
            r[(row, col)] = Complex::new(T::lit(v.re), T::lit(v.im));
            r[(col, row)] = Complex::new(T::lit(v.re), T::lit(-v.im));
        }
    }
    let (r, factor, min_eig) = psd_factor(r, 0)?;
    Ok(CovarianceEntry {
        r,
        beta_db,
        shadow_db: shadow,
        min_eigenvalue: Some(min_eig),
        factor,
    })
}

/// Covariances of all UEs of a drop.
#[derive(Debug, Clone)]
pub struct CovarianceSet<T: Real> {
    entries: Vec<CovarianceEntry<T>>,
}

impl<T: Real> CovarianceSet<T> {
    pub fn from_entries(entries: Vec<CovarianceEntry<T>>) -> Result<Self> {
        if let Some(first) = entries.first() {
            let m = first.r.nrows();
            if entries.iter().any(|e| e.r.nrows() != m) {
                return Err(Error::DimensionMismatch(
                    "covariances of different sizes".into(),
                ));
            }
        }
        Ok(Self { entries })
    }

    /// Wraps explicit matrices, checking Hermitian symmetry and PSD-ness.
    pub fn from_matrices(r: Vec<CMatrix<T>>) -> Result<Self> {
        let entries = r
            .into_iter()
            .enumerate()
            .map(|(i, m)| CovarianceEntry::from_matrix(m, i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(entries)
    }

    /// Draws shadowing for every UE of `drop` and assembles its covariance.
    pub fn generate<R: Rng + ?Sized>(
        config: &SystemConfig,
        drop: &UserDrop,
        model: CovarianceModel,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let mut entries = Vec::with_capacity(drop.len());
        for (&d, &theta) in drop.distances.iter().zip(&drop.angles) {
            let beta_db = super::pathloss_db(d, config.gamma_db, config.alpha)?;
            let entry = match model {
                CovarianceModel::Uncorrelated => {
                    covariance_uncorrelated(beta_db, config.sigma_sf_db, config.m, rng)
                }
                CovarianceModel::Correlated => covariance_correlated(
                    beta_db,
                    config.r_corr,
                    theta,
                    config.sigma_sf_db,
                    config.m,
                    rng,
                )?,
            };
            entries.push(entry);
        }
        Self::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Antennas.
    pub fn m(&self) -> usize {
        self.entries.first().map_or(0, |e| e.r.nrows())
    }

    pub fn entries(&self) -> &[CovarianceEntry<T>] {
        &self.entries
    }

    pub fn r(&self, k: usize) -> &CMatrix<T> {
        &self.entries[k].r
    }

    pub fn beta_db(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.beta_db).collect()
    }

    /// `tr(R_k)`, i.e. `E ||g_k||^2`.
    pub fn trace(&self, k: usize) -> T {
        trace_re(&self.entries[k].r)
    }
}
