use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{x} is not invertible modulo {q}")]
    NotInvertible { x: i64, q: u64 },

    #[error("modulus {0} must be odd")]
    EvenModulus(u64),

    #[error("empty range [{lo}, {hi}]")]
    EmptyRange { lo: u64, hi: u64 },

    #[error("{value} has no square root modulo {q}")]
    NoSquareRoot { value: u64, q: u64 },

    #[error("projected size {projected} exceeds budget {budget}")]
    BudgetExceeded { projected: u64, budget: u64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureNotConverged { tolerance: f64, estimate: f64 },

    #[error("Poisson window too small: tail term {tail:e} exceeds {tolerance:e}")]
    WindowTooSmall { tail: f64, tolerance: f64 },

    #[error("{nodes} nodes is below the exactness threshold {required}")]
    InsufficientNodes { nodes: usize, required: usize },

    #[error("no admissible moduli in [{lo}, {hi}]")]
    EmptyModuli { lo: u64, hi: u64 },

    #[error("shell is empty")]
    EmptyShell,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed shell file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
