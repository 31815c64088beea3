use thiserror::Error;

/// Failure of a sub-command, carrying its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Constraint(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

pub const EXIT_GATE_FAILED: i32 = 5;

impl From<detfield::Error> for CliError {
    fn from(e: detfield::Error) -> Self {
        use detfield::Error as E;
        match e {
            E::NonConvergence(m) => CliError::NonConvergence(m),
            E::Constraint(m) => CliError::Constraint(m),
            E::Unsupported(_) => CliError::Config(e.to_string()),
            E::OutsideSupport { .. }
            | E::DegreeTooLarge { .. }
            | E::NotHermitian(_)
            | E::OverlappingWindows(_)
            | E::SpectrumNearOne(_)
            | E::TooLarge { .. }
            | E::IncompleteTable(_)
            | E::InvalidKernel(_)
            | E::InvalidDensity(_)
            | E::Sampler(_) => CliError::Constraint(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
