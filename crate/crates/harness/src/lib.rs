//! Experiment runner for sleeping competing bandits: TOML configuration,
//! parallel ensembles of seeded trials, two-level aggregation and CSV output.

pub mod aggregate;
pub mod config;
pub mod error;
pub mod runner;

pub use config::{Aggregation, Generator, RunConfig};
pub use error::HarnessError;
pub use runner::{run, RunReport};
