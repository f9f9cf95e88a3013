use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: needlab::Error,
    },

    #[error("estimated cost {estimate:.3e} exceeds the ceiling {ceiling:.3e}")]
    Budget { estimate: f64, ceiling: f64 },

    #[error("empty result table")]
    EmptyTable,

    #[error("i/o failure on {path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    /// 3 for numerical non-convergence, 2 for everything the user can fix,
    /// 1 for I/O trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core { source, .. } if source.is_numerical() => 3,
            HarnessError::Io { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Attaches configuration context to core errors.
pub(crate) trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for needlab::Result<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| HarnessError::Core { context: ctx(), source })
    }
}

pub(crate) fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io { path: path.display().to_string(), message: e.to_string() }
}
