use alloc::string::String;

/// Errors produced by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("{n} qubits exceeds the dense limit of {limit}")]
    DenseLimit { n: usize, limit: usize },

    #[error("{n} qubits exceeds the statevector limit of {limit}")]
    StatevectorLimit { n: usize, limit: usize },

    #[error("|theta| = {theta} exceeds delta = {delta}; increase N or delta")]
    AngleExceedsDelta { theta: f64, delta: f64 },

    #[error("delta = {0} must lie in (0, pi)")]
    InvalidDelta(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate Pauli term {0}")]
    DuplicateTerm(String),

    #[error("hamiltonian has no terms")]
    EmptyHamiltonian,

    #[error("coefficient schedule undefined at t = {0}")]
    ScheduleUndefined(f64),

    #[error("operation requires time-independent coefficients")]
    TimeDependentUnsupported,

    #[error("delta = {delta} is not of the form pi*2^(1-l); nearest is l = {nearest_level} (delta = {nearest_delta})")]
    NotHierarchyAngle {
        delta: f64,
        nearest_level: u32,
        nearest_delta: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;
