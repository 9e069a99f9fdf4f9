use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("path enumeration needs {paths} paths, above the cap of {cap}")]
    CapExceeded { paths: u128, cap: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid register size {qubits} (supported: 1..={max})")]
    Size { qubits: usize, max: usize },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    Index { index: usize, num_qubits: usize },

    #[error("unsupported branching factor k = {0}; circuits support k <= 2")]
    UnsupportedK(usize),

    #[error("expected a {expected} gate, found {found}")]
    WrongGateKind {
        expected: &'static str,
        found: String,
    },

    #[error("no characteristic function evaluation for l = {0}")]
    MissingEval(i64),

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
