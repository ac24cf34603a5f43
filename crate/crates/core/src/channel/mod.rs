//! User drops, long-term fading, spatial covariances and correlated Rayleigh
//! channel realizations for a single square cell with the BS at its center.

mod config;
mod covariance;
mod geometry;
mod realization;

pub use config::{thermal_noise_dbm, SystemConfig};
pub use covariance::{
    covariance_correlated, covariance_uncorrelated, CovarianceEntry, CovarianceModel,
    CovarianceSet, PSD_TOLERANCE,
};
pub use geometry::{average_snr_db, drop_users, pathloss_db, UserDrop};
pub use realization::{sample_channel, ChannelRealization};
