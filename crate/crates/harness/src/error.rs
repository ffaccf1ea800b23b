use std::path::PathBuf;

use sleeping_bandits::instances::InstanceError;
use sleeping_bandits::simulation::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Every problem found in the configuration.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("instance {instance}: {source}")]
    Instance { instance: usize, source: InstanceError },
    #[error("cannot load environment spec {path}: {message}")]
    SpecFile { path: PathBuf, message: String },
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    /// Process exit code: 1 for configuration errors, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}
