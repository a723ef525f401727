use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    InvalidQubit { index: usize, n_qubits: usize },

    #[error("invalid bond ({0}, {1})")]
    InvalidBond(usize, usize),

    /// A projection onto an outcome the state assigns zero probability.
    #[error("contradictory projection onto {pauli}: the opposite sign is already stabilized")]
    Contradiction { pauli: String },

    /// A Pauli term has (numerically) vanishing weight, so the
    /// measurement scheme cannot reconstruct it.
    #[error("tomographically incomplete: w({pauli}) = {weight:e} is below threshold")]
    Incomplete { pauli: String, weight: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} exceeds the supported size ({limit})")]
    TooLarge { what: String, limit: usize },

    #[error("weight vector is not normalized")]
    Unnormalized,

    #[error("identity mass vanished; cannot normalize")]
    ZeroMass,

    #[error("rank-deficient least-squares design: {0}")]
    RankDeficient(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
