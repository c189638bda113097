//! Seeded Monte Carlo sweeps over random user drops: configuration, user
//! generation, per-trial evaluation of every scheme and CSV output.

pub mod config;
pub mod error;
pub mod output;
pub mod sweep;
pub mod users;

pub use config::{dbm_to_watts, ExperimentConfig, SchemeKind, Sweep};
pub use error::SimError;
pub use sweep::{evaluate_trial, run_sweep, summarize, ResultRow, ScheduleRecord, SummaryRow, SweepOutput};
pub use users::generate_users;
