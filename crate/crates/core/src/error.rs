use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} outside the support of {what}")]
    OutsideSupport { what: &'static str, value: f64 },

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("degree {degree} exceeds the configured maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("sub-windows overlap: {0}")]
    OverlappingWindows(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("spectrum too close to 1 (max eigenvalue {0}); use the chain-rule sampler path for projector densities")]
    SpectrumNearOne(f64),

    #[error("ground set of size {size} exceeds the limit {max}")]
    TooLarge { size: usize, max: usize },

    #[error("cluster table incomplete: missing entry for subset mask {0:#b}")]
    IncompleteTable(usize),

    #[error("invalid DPP kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
