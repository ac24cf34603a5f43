//! Seeded experiment runner for the rKA combining library.
//!
//! Specs are read from TOML ([`spec`]), experiments produce
//! [`table::ResultTable`]s that are written as CSV with a JSON metadata
//! sidecar, and [`checks`] holds the pass/fail criteria shared by the
//! `validate` subcommand and the acceptance tests.

pub mod checks;
pub mod experiments;
pub mod spec;
pub mod table;

pub use experiments::{gap_curve, label_key, GapCurve};
pub use spec::{Correlation, ExperimentSpec};
pub use table::{ResultTable, Schema};
