//! Experiment runner for `helmholtz-dd`: run configurations, the single-run
//! pipeline, and sweeps over the catalogue of reference tables.

pub mod config;
pub mod run;
pub mod sweep;

pub use config::RunConfig;
pub use run::{run, Problem, RunOutcome, RunRecord};

/// Failure of a run, classified by exit status.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),

    #[error(
        "size cap: {ndofs} dofs exceeds the cap of {cap} (raise it with {})",
        run::MAX_DOFS_ENV
    )]
    SizeCap { ndofs: usize, cap: usize },

    #[error("{phase} failed: {source}")]
    Failed {
        phase: &'static str,
        source: helmholtz_dd::Error,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 3 for configuration errors, 4 for a size-cap refusal, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 3,
            RunError::SizeCap { .. } => 4,
            RunError::Failed { .. } | RunError::Io(_) => 1,
        }
    }
}
