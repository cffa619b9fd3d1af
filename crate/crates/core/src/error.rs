use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("superposition vanishes: z1·ψ1 + z2·ψ2 has norm {norm:e}")]
    DegenerateSuperposition { norm: f64 },

    #[error("negative evolution time t = {0}; the semigroup is not invertible")]
    NegativeTime(f64),

    #[error("peripheral eigenvalue {eigenvalue} carries a Jordan block (coupling {coupling:e})")]
    DefectivePeripheral { eigenvalue: String, coupling: f64 },

    #[error("no optimizer start converged ({dropped} dropped after {max_iter} iterations)")]
    NonConvergence { dropped: usize, max_iter: usize },

    #[error("kernel element stayed degenerate after {0} draws")]
    DegenerateKernel(usize),

    #[error("quadrature consistency failed at {moment}: residual {residual:e}")]
    Quadrature { moment: String, residual: f64 },

    #[error("Fock cutoff {cutoff} too small for |zeta| = {modulus}: tail {tail:e}")]
    Truncation { cutoff: usize, modulus: f64, tail: f64 },

    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DefectivePeripheral { .. }
                | Error::NonConvergence { .. }
                | Error::DegenerateKernel(_)
                | Error::Quadrature { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Validation(_) => "validation",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::DegenerateSuperposition { .. } => "degenerate_superposition",
            Error::NegativeTime(_) => "negative_time",
            Error::DefectivePeripheral { .. } => "defective_peripheral",
            Error::NonConvergence { .. } => "non_convergence",
            Error::DegenerateKernel(_) => "degenerate_kernel",
            Error::Quadrature { .. } => "quadrature",
            Error::Truncation { .. } => "truncation",
            Error::Parse { .. } => "parse",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}
