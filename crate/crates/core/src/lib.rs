//! Quasi-static simulation of PV curtailment for voltage control in
//! distribution feeders, with fairness-aware dispatch variants.

pub mod dispatch;
pub mod error;
pub mod grid;
pub mod linprog;
pub mod metrics;
pub mod powerflow;
pub mod pv;
pub mod sensitivity;
pub mod sim;

pub use error::{Error, Result};
