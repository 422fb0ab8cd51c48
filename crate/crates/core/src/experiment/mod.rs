//! Reproducible experiment arms: configuration, named presets, the runner
//! that writes result directories, and comparison across finished runs.

mod compare;
mod config;
mod presets;
mod run;

pub use compare::{compare, expand, load_arm, ArmRow, Comparison, LoadedArm, Spread};
pub use config::{AgentFamily, EvalSettings, ExperimentConfig, VERSION};
pub use presets::{baseline, learned, preset, DESK_EPOCHS, PRESETS};
pub use run::{derive_seed, eval_header, prepare, run_all, run_arm, run_seed, train_seed, ArmSummary, Prepared, SeedResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("incompatible runs: {0}")]
    Incompatible(String),
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io(_) => 3,
            Self::Incompatible(_) => 4,
        }
    }
}
