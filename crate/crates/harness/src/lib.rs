//! Experiment harness for `ibrl-core`: configuration, seeded and parallel
//! rollouts, CSV run records, bootstrap statistics and the acceptance checks.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod experiments;
pub mod record;
pub mod report;
pub mod stats;

pub use error::{HarnessError, Result};
