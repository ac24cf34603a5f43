use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SystemConfig;
use crate::error::{Error, Result};

/// UE positions relative to the BS at the cell center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    pub positions: Vec<[f64; 2]>,
    pub distances: Vec<f64>,
    /// Azimuth of each UE seen from the BS, in `[-pi, pi)`.
    pub angles: Vec<f64>,
}

impl UserDrop {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Builds a drop from explicit positions.
    pub fn from_positions(positions: Vec<[f64; 2]>) -> Self {
        let distances = positions.iter().map(|p| p[0].hypot(p[1])).collect();
        let angles = positions
            .iter()
            .map(|p| wrap_angle(p[1].atan2(p[0])))
            .collect();
        Self {
            positions,
            distances,
            angles,
        }
    }
}

fn wrap_angle(theta: f64) -> f64 {
    if theta >= std::f64::consts::PI {
        theta - 2.0 * std::f64::consts::PI
    } else {
        theta
    }
}

/// Places `K` UEs uniformly over the square cell minus the exclusion disk
/// around the BS, by rejection sampling.
pub fn drop_users<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Result<UserDrop> {
    config.validate()?;
    let half = config.cell_side / 2.0;
    if config.min_distance >= config.half_diagonal() {
        return Err(Error::EmptyDropRegion {
            min_distance: config.min_distance,
            half_diagonal: config.half_diagonal(),
        });
    }
    let mut positions = Vec::with_capacity(config.k);
    while positions.len() < config.k {
        let x = rng.random_range(-half..half);
        let y = rng.random_range(-half..half);
        if x.hypot(y) >= config.min_distance {
            positions.push([x, y]);
        }
    }
    Ok(UserDrop::from_positions(positions))
}

/// `gamma - 10 alpha log10(d)` in dB.
pub fn pathloss_db(distance: f64, gamma_db: f64, alpha: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::NonPositiveDistance(distance));
    }
    Ok(gamma_db - 10.0 * alpha * distance.log10())
}

/// Average uplink SNR of a UE at `distance`, shadowing excluded.
pub fn average_snr_db(distance: f64, config: &SystemConfig) -> Result<f64> {
    Ok(pathloss_db(distance, config.gamma_db, config.alpha)? + config.rho_ul_db())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::StreamKey;

    #[test]
    fn reference_distance() {
        assert_eq!(pathloss_db(1.0, -35.3, 3.76).unwrap(), -35.3);
        assert!(pathloss_db(0.0, -35.3, 3.76).is_err());
        assert!(pathloss_db(-2.0, -35.3, 3.76).is_err());
    }

    #[test]
    fn pathloss_at_35m() {
        let b = pathloss_db(35.0, -35.3, 3.76).unwrap();
        assert!((b + 93.357).abs() < 1e-3, "{b}");
    }

    #[test]
    fn drop_respects_support() {
        let cfg = SystemConfig::dense_urban(100, 50);
        let mut rng = StreamKey::new(3).rng();
        for _ in 0..20 {
            let d = drop_users(&cfg, &mut rng).unwrap();
            assert_eq!(d.len(), 50);
            for (p, &dist) in d.positions.iter().zip(&d.distances) {
                assert!(dist >= 35.0 && dist <= cfg.half_diagonal());
                assert!(p[0].abs() <= 125.0 && p[1].abs() <= 125.0);
            }
            for &a in &d.angles {
                assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&a));
            }
        }
    }

    #[test]
    fn exclusion_covering_cell_is_an_error() {
        let mut cfg = SystemConfig::dense_urban(8, 2);
        cfg.min_distance = cfg.half_diagonal();
        let mut rng = StreamKey::new(3).rng();
        assert!(matches!(
            drop_users(&cfg, &mut rng),
            Err(Error::EmptyDropRegion { .. })
        ));
    }

    #[test]
    fn mean_distance_matches_closed_form() {
        // mean distance from the center of a square of half-side 1
        let oracle = (2f64.sqrt() + 1f64.asinh()) / 3.0;
        assert!((oracle - 0.7652).abs() < 1e-4);
        let mut cfg = SystemConfig::dense_urban(8, 8);
        cfg.cell_side = 2.0;
        cfg.min_distance = 0.0;
        let mut rng = StreamKey::new(11).rng();
        let mut sum = 0.0;
        let mut n = 0usize;
        for _ in 0..5000 {
            let d = drop_users(&cfg, &mut rng).unwrap();
            sum += d.distances.iter().sum::<f64>();
            n += d.len();
        }
        let mean = sum / n as f64;
        // std of the distance is about 0.29, so 4e4 samples give ~1.5e-3
        assert!((mean - oracle).abs() < 6e-3, "{mean} vs {oracle}");
    }
}
