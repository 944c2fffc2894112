use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad configuration file, flag value or parameter.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] ibrl_core::Error),

    /// A core error annotated with the rollout it came from.
    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: ibrl_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} acceptance criteria failed")]
    Validation(usize),

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(ibrl_core::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Attaches rollout context to core errors.
pub(crate) trait RunContext<T> {
    fn in_run(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> RunContext<T> for std::result::Result<T, ibrl_core::Error> {
    fn in_run(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| match source {
            ibrl_core::Error::Config(_) => HarnessError::Core(source),
            source => HarnessError::Run {
                context: context(),
                source,
            },
        })
    }
}
