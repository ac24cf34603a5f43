use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thermal noise floor `-174 dBm/Hz + 10 log10(B) + NF`.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Scenario scale, powers and propagation constants of a single cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// BS antennas.
    pub m: usize,
    /// Single-antenna UEs.
    pub k: usize,
    /// Side of the square cell, meters. The BS sits at the center.
    pub cell_side: f64,
    pub min_distance: f64,
    /// Pathloss at the 1 m reference distance, dB.
    pub gamma_db: f64,
    pub alpha: f64,
    pub sigma_sf_db: f64,
    pub r_corr: f64,
    pub ul_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub tau_c: usize,
    /// Pilot length; `None` means `tau_p = K`.
    pub tau_p: Option<usize>,
    /// RZF regularization; `None` means `1 / rho_ul`.
    pub xi: Option<f64>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::dense_urban(100, 10)
    }
}

impl SystemConfig {
    /// Single-cell NLoS dense-urban defaults: 250 m square cell, 35 m
    /// exclusion radius, 20 dBm UEs, 20 MHz with a 10 dB noise figure,
    /// 200-symbol coherence blocks and `tau_p = K`.
    pub fn dense_urban(m: usize, k: usize) -> Self {
        let bandwidth_hz = 20e6;
        Self {
            m,
            k,
            cell_side: 250.0,
            min_distance: 35.0,
            gamma_db: -35.3,
            alpha: 3.76,
            sigma_sf_db: 4.0,
            r_corr: 0.5,
            ul_power_dbm: 20.0,
            noise_power_dbm: thermal_noise_dbm(bandwidth_hz, 10.0),
            bandwidth_hz,
            tau_c: 200,
            tau_p: None,
            xi: None,
        }
    }

    pub fn with_loading(m: usize, loading: f64) -> Self {
        let k = ((loading * m as f64).round() as usize).max(1);
        Self::dense_urban(m, k)
    }

    pub fn tau_p(&self) -> usize {
        self.tau_p.unwrap_or(self.k)
    }

    pub fn tau_ul(&self) -> usize {
        self.tau_c.saturating_sub(self.tau_p())
    }

    /// `tau_ul / tau_c`.
    pub fn prefactor(&self) -> f64 {
        self.tau_ul() as f64 / self.tau_c as f64
    }

    pub fn rho_ul_db(&self) -> f64 {
        self.ul_power_dbm - self.noise_power_dbm
    }

    /// Normalized uplink SNR in linear scale.
    pub fn rho_ul(&self) -> f64 {
        10f64.powf(self.rho_ul_db() / 10.0)
    }

    pub fn xi(&self) -> f64 {
        self.xi.unwrap_or_else(|| 1.0 / self.rho_ul())
    }

    pub fn loading(&self) -> f64 {
        self.k as f64 / self.m as f64
    }

    pub fn half_diagonal(&self) -> f64 {
        self.cell_side * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k < 1 || self.k > self.m {
            return bad(format!("need 1 <= K <= M, got K={} M={}", self.k, self.m));
        }
        if self.tau_p() < self.k {
            return bad(format!(
                "tau_p={} is shorter than K={}",
                self.tau_p(),
                self.k
            ));
        }
        if self.tau_c <= self.tau_p() {
            return bad(format!(
                "tau_c={} must exceed tau_p={}",
                self.tau_c,
                self.tau_p()
            ));
        }
        if !(0.0..=1.0).contains(&self.r_corr) {
            return Err(Error::CorrelationOutOfRange(self.r_corr));
        }
        if !(self.min_distance >= 0.0) || !(self.cell_side > 0.0) {
            return bad("cell geometry must be positive".into());
        }
        if !(self.sigma_sf_db >= 0.0) {
            return bad(format!(
                "shadowing deviation {} is negative",
                self.sigma_sf_db
            ));
        }
        if !(self.alpha > 0.0) {
            return bad(format!("pathloss exponent {} must be positive", self.alpha));
        }
        if let Some(xi) = self.xi {
            if !(xi >= 0.0) {
                return bad(format!("xi={xi} must be nonnegative"));
            }
        }
        let rho = self.rho_ul();
        if !(rho > 0.0 && rho.is_finite()) {
            return bad(format!("normalized SNR {rho} is not positive"));
        }
        Ok(())
    }
}
