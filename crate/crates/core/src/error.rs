use thiserror::Error;

/// Errors produced by the library.
///
/// Variants fall into three groups that the command-line front end maps onto
/// distinct exit codes: invalid input, numeric guard failures and I/O.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("discriminant {d} is not admissible: {reason}")]
    Inadmissible { d: i64, reason: String },

    #[error("coefficient table holds n <= {available}, but n <= {required} is needed")]
    InsufficientTable { required: u64, available: u64 },

    #[error("missing prime data for p = {0}")]
    MissingPrime(u64),

    #[error("truncation needs n_max = {required}, above the hard cap {cap}")]
    HardCapExceeded { required: u64, cap: u64 },

    #[error("coefficient at n = {0} does not fit the exact 128-bit range")]
    CoefficientOverflow(u64),

    #[error("q-series error: {0}")]
    Series(String),

    #[error(
        "functional-equation split failed for conductor {conductor}: residual {residual:e} \
         exceeds gate {gate:e}"
    )]
    SplitGate {
        conductor: u64,
        residual: f64,
        gate: f64,
    },

    #[error("zero threshold {threshold:e} does not exceed the largest tail bound {tail:e}")]
    ThresholdBelowTail { threshold: f64, tail: f64 },

    #[error("B(x) extrapolation did not converge: relative fit residual {relative:e} > {limit:e}")]
    FitDiverged { relative: f64, limit: f64 },

    #[error("coefficient file header: {0}")]
    Header(String),

    #[error("coefficient file line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("coefficient file truncated: expected n up to {expected}, last entry {last}")]
    Truncated { expected: u64, last: u64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numeric guard (tail bound, split gate, fit),
    /// as opposed to bad input or I/O.
    pub fn is_numeric_guard(&self) -> bool {
        matches!(
            self,
            Error::HardCapExceeded { .. }
                | Error::SplitGate { .. }
                | Error::ThresholdBelowTail { .. }
                | Error::FitDiverged { .. }
                | Error::CoefficientOverflow(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io(_) | Error::Header(_) | Error::Format { .. } | Error::Truncated { .. } | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
