use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Infeasible(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(exactsac::Error),
}

impl CliError {
    /// 2 for usage errors, 3 for infeasible configurations, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io { .. } | CliError::Core(_) => 1,
        }
    }
}

impl From<exactsac::Error> for CliError {
    fn from(e: exactsac::Error) -> Self {
        use exactsac::Error as E;
        match e {
            E::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            E::InvalidCounts { .. }
            | E::InvalidTarget(_)
            | E::InvalidProbability(_)
            | E::InvalidParameter(_)
            | E::EmptyInput => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
