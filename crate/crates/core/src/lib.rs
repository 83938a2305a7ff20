//! Exact diagonalization toolkit for N-qubit Hamiltonians written as sums of
//! Pauli strings.
//!
//! The crate covers the full path from operator algebra to dynamics:
//!
//! - [`pauli`]: bitmask-encoded Pauli strings, weighted operator sums, dense
//!   realization and the inverse Pauli decomposition.
//! - [`hilbert`]: state vectors in the computational basis, GHZ states, the
//!   total magnetization and its order parameter.
//! - [`hamiltonians`]: projector Hamiltonians, spin-string Hamiltonians, the
//!   Ising ring and local perturbations.
//! - [`spectral`]: dense diagonalization, Lehmann-form correlation functions
//!   (pure, degenerate and thermal ensembles) and spectral analysis.
//! - [`floquet`]: the kicked Ising drive, stroboscopic evolution and effective
//!   Hamiltonians from the principal matrix logarithm.
//!
//! Bit `j` of a basis index is site `j + 1`; a zero bit is spin up
//! (σz eigenvalue +1).

pub mod error;
pub mod floquet;
pub mod hamiltonians;
pub mod hilbert;
pub mod linalg;
pub mod pauli;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, C64};

/// Largest qubit count accepted by dense code paths.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Rejects qubit counts above [`MAX_DENSE_QUBITS`].
pub fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}
