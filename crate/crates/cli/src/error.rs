use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] toruslab::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use toruslab::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) | CliError::Json(_) => EXIT_FAILURE,
            CliError::Core(e) => match e {
                E::Parse(_) => EXIT_CONFIG,
                E::EnumerationBudgetExceeded { .. }
                | E::PowerIterationStall { .. }
                | E::ConvergenceFailure { .. } => EXIT_BUDGET,
                E::Dimension(_)
                | E::NonUnimodular { .. }
                | E::InvalidParameter(_)
                | E::NotDiagonalizable { .. }
                | E::InsufficientData(_)
                | E::InfiniteDissipation(_)
                | E::NoPeak(_)
                | E::SolveDivergence(_)
                | E::NegativeDensity { .. } => EXIT_PRECONDITION,
            },
        }
    }
}
