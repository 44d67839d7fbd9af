use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("instance has no jobs")]
    EmptyInstance,

    #[error("job {index} has invalid processing time {value}")]
    InvalidProcessingTime { index: usize, value: f64 },

    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("interval has {got} samples, at least {needed} required")]
    InsufficientSamples { got: usize, needed: usize },

    #[error("strategy error: {0}")]
    Strategy(String),

    #[error("instance too large for the exact oracle: {0}")]
    OracleScale(String),

    #[error("sample budget exceeded: {planned} draws planned, limit {limit}")]
    BudgetExceeded { planned: u64, limit: u64 },

    #[error("sketch quality violated: alpha={alpha}, beta1={beta1}, beta2={beta2}")]
    QualityViolation { alpha: f64, beta1: f64, beta2: f64 },

    #[error("schedule infeasible: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown validation suite `{0}`")]
    UnknownSuite(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl Error {
    /// Errors a caller can fix by changing parameters or inputs.
    pub fn is_configuration(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Infeasible(_))
    }
}
