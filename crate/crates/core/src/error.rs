use thiserror::Error;

/// Errors produced by the algebra, builders and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size mismatch: {left} qubits vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },

    #[error("capacity exceeded: n = {n} qubits, dense paths are limited to 2^{max} amplitudes")]
    Capacity { n: usize, max: usize },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("states are not orthonormal (max overlap defect = {max_overlap:e})")]
    NonOrthogonal { max_overlap: f64 },

    #[error(
        "ground state is {degeneracy}-fold degenerate (gs_degeneracy); use the mixed ground-state ensemble"
    )]
    DegenerateGroundState { degeneracy: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
