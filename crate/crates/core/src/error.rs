use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {index} = {value} lies outside the domain of the {mirror} mirror")]
    Domain {
        mirror: &'static str,
        index: usize,
        value: f64,
    },

    #[error("inverse mirror map overflows at coordinate {index} (dual value {value})")]
    Overflow { index: usize, value: f64 },

    #[error("unsupported combination: {mirror} mirror with {regularizer} regularizer")]
    Unsupported {
        mirror: &'static str,
        regularizer: &'static str,
    },

    #[error("{operation} is not available for the {regularizer} regularizer")]
    UnsupportedOperation {
        operation: &'static str,
        regularizer: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schedule violation at n = {n}: {reason}")]
    ScheduleViolation { n: usize, reason: String },

    #[error("initial point is not a minimizer of the regularizer (G(x1) = {value}, min G = {minimum})")]
    NotRegularizerMinimizer { value: f64, minimum: f64 },

    #[error("batch size {batch} exceeds the {rows} available rows")]
    BatchTooLarge { batch: usize, rows: usize },

    #[error("objective is unbounded below: {0}")]
    Unbounded(String),
}
