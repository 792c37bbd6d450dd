use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// No 2π branch of the geometric phase fits the admissible interval.
    #[error(
        "unreachable path: no branch of gamma_g = {gamma_g_base:.6} + 2πk lies in the admissible interval [{lo:.6}, {hi:.6}]"
    )]
    UnreachablePath { gamma_g_base: f64, lo: f64, hi: f64 },

    #[error("invalid gate spec: {0}")]
    InvalidSpec(String),

    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("integration step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Tomography design matrix does not span the operator space.
    #[error("rank-deficient tomography system: rank {rank} of {needed} required")]
    RankDeficient { rank: usize, needed: usize },

    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
