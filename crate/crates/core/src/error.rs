use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in input")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("derivative is not traceless (trace {0:e})")]
    NotTraceless(f64),

    #[error("Bloch vector length {0} exceeds 1")]
    BlochOutsideBall(f64),

    #[error("invalid POVM: alpha={alpha}, beta={beta} violates 0 <= alpha <= 1, |beta| <= min(alpha, 1-alpha)")]
    InvalidPovm { alpha: f64, beta: f64 },

    #[error("POVM coefficients sit on the positivity boundary (alpha={alpha}, beta={beta}); analytic derivative diverges")]
    PositivityBoundary { alpha: f64, beta: f64 },

    #[error("outcome {outcome} has vanishing probability {probability:e}")]
    ZeroProbability { outcome: usize, probability: f64 },

    #[error("effects do not sum to the identity (deviation {0:e})")]
    IncompleteMeasurement(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("weight matrix must be symmetric positive definite")]
    InvalidWeight,

    #[error("reparametrization derivative is zero")]
    ZeroJacobian,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
