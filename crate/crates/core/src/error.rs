use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The document does not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A value violates a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// No backlog-free, terminal-zero schedule exists.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit of {limit} exceeded")]
    IterationLimit { limit: usize },

    #[error("branch-and-bound node limit of {limit} reached without an incumbent")]
    NodeLimit { limit: usize },

    #[error("enumeration space of {bound} schedules exceeds the limit of {limit}")]
    SpaceTooLarge { bound: u128, limit: u64 },

    #[error("purchase plan does not match schedule: {0}")]
    PlanMismatch(String),

    #[error("unknown report format `{0}`")]
    UnknownFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 infeasible, 2 invalid input, 3 limit hit.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) | Error::Unbounded => 1,
            Error::Schema(_)
            | Error::Validation(_)
            | Error::Shape(_)
            | Error::PlanMismatch(_)
            | Error::UnknownFormat(_)
            | Error::Io(_) => 2,
            Error::IterationLimit { .. } | Error::NodeLimit { .. } | Error::SpaceTooLarge { .. } => 3,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Schema(err.to_string())
    }
}
