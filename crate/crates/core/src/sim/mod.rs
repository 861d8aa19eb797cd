//! Closed-loop multi-day simulation, Pareto sweeps over the fairness
//! weight, and their file outputs.

mod config;
pub mod output;
mod profiles;
mod run;
mod sweep;

pub use config::RunConfig;
pub use profiles::{synth_profiles, Profiles};
pub use run::{day_metrics, fairness_ratios, run_simulation, DayMetrics, RunReport, SimOptions, StepLog, AC_SLACK};
pub use sweep::{pareto_sweep, SweepRow};
