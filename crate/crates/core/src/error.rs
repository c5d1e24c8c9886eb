use alloc::string::String;

/// Errors produced by the simulator, samplers and engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{requested} qubits exceeds the dense cap of {cap}")]
    QubitCap { requested: usize, cap: usize },

    #[error("operator is not Hermitian")]
    NotHermitian,

    #[error("operator is not unitary")]
    NotUnitary,

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("generator is not involutory (H^2 != I)")]
    NotInvolutory,

    #[error("operator pool is empty")]
    EmptyPool,

    #[error("no {degree}-regular simple graph on {vertices} vertices")]
    InfeasibleGraph { vertices: usize, degree: usize },

    #[error("invalid qubit set: {0}")]
    InvalidQubitSet(String),

    #[error("ground energy is zero; use the fidelity 1 - J instead of the approximation ratio")]
    ZeroGroundEnergy,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
