//! Builders for the time-crystal Hamiltonians and their perturbations.
//!
//! Sites are 0-based in code; all nearest-neighbour couplings close
//! periodically around the ring.

use faer::Mat;

use crate::error::{Error, Result};
use crate::hilbert::{inner, make_ghz, GhzSign, StateVector, NORM_TOL};
use crate::linalg::{DenseMatrix, C64};
use crate::pauli::{OperatorSum, Pauli, PauliString};

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Orthonormal states with assigned energies; everything orthogonal to them
/// sits at energy zero.
#[derive(Debug, Clone)]
pub struct ProjectorSpec {
    n: usize,
    states: Vec<StateVector>,
    energies: Vec<f64>,
}

impl ProjectorSpec {
    pub fn new(n: usize, states: Vec<StateVector>, energies: Vec<f64>) -> Result<Self> {
        crate::check_capacity(n)?;
        if states.len() != energies.len() {
            return Err(Error::InvalidArgument(format!(
                "{} states but {} energies",
                states.len(),
                energies.len()
            )));
        }
        if let Some(bad) = states.iter().find(|s| s.n() != n) {
            return Err(Error::SizeMismatch {
                left: n,
                right: bad.n(),
            });
        }
        let mut max_overlap = 0.0f64;
        for (i, a) in states.iter().enumerate() {
            for b in &states[i + 1..] {
                max_overlap = max_overlap.max(inner(a, b)?.norm());
            }
        }
        if max_overlap > NORM_TOL {
            return Err(Error::NonOrthogonal { max_overlap });
        }
        Ok(ProjectorSpec {
            n,
            states,
            energies,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
}

/// `H = Σ_j ε_j |E_j⟩⟨E_j|`.
pub fn build_projector_hamiltonian(spec: &ProjectorSpec) -> DenseMatrix {
    let dim = 1usize << spec.n;
    let mut h = Mat::<C64>::zeros(dim, dim);
    for (s, &e) in spec.states.iter().zip(&spec.energies) {
        let a = s.amplitudes();
        for (j, aj) in a.iter().enumerate() {
            if aj.norm_sqr() == 0.0 {
                continue;
            }
            let w = aj.conj() * e;
            for (i, ai) in a.iter().enumerate() {
                h[(i, j)] += ai * w;
            }
        }
    }
    h
}

/// `-|G+⟩⟨G+|`: ground state `G+` at −1, everything else at 0.
pub fn build_ghz_projector(n: usize) -> Result<DenseMatrix> {
    let spec = ProjectorSpec::new(n, vec![make_ghz(GhzSign::Plus, n)?], vec![-1.0])?;
    Ok(build_projector_hamiltonian(&spec))
}

/// `-J/(n(n-1)) Σ_{i<j}` of the all-σx string with σy substituted on sites
/// `i` and `j`.
pub fn build_xy_string(n: usize, coupling: f64) -> Result<OperatorSum> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "the XY string Hamiltonian needs n >= 2, got {n}"
        )));
    }
    let c = real(-coupling / (n * (n - 1)) as f64);
    let mut h = OperatorSum::new(n)?;
    for i in 0..n {
        for j in i + 1..n {
            let sites: Vec<(usize, Pauli)> = (0..n)
                .map(|k| (k, if k == i || k == j { Pauli::Y } else { Pauli::X }))
                .collect();
            h.add_term(c, PauliString::from_sites(n, &sites)?)?;
        }
    }
    Ok(h)
}

fn ring_pairs(n: usize, p: Pauli, coeff: C64) -> Result<OperatorSum> {
    let mut h = OperatorSum::new(n)?;
    for j in 0..n {
        h.add_term(
            coeff,
            PauliString::from_sites(n, &[(j, p), ((j + 1) % n, p)])?,
        )?;
    }
    Ok(h)
}

/// Ferromagnetic Ising ring `-Σ_j σz^(j) σz^(j+1)`.
pub fn build_ising_ring(n: usize) -> Result<OperatorSum> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "the Ising ring needs n >= 3, got {n}"
        )));
    }
    ring_pairs(n, Pauli::Z, real(-1.0))
}

/// Half-chain strings: σx on the first `⌊n/2⌋` sites minus σx on the rest.
pub fn build_half_strings(n: usize) -> Result<OperatorSum> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "the half-string term needs n >= 4, got {n}"
        )));
    }
    let m = n / 2;
    let first: Vec<_> = (0..m).map(|j| (j, Pauli::X)).collect();
    let second: Vec<_> = (m..n).map(|j| (j, Pauli::X)).collect();
    OperatorSum::from_terms(
        n,
        [
            (real(1.0), PauliString::from_sites(n, &first)?),
            (real(-1.0), PauliString::from_sites(n, &second)?),
        ],
    )
}

/// `H(J) = H0 + J·H1`: Ising ring plus the half-chain strings.
pub fn build_hj(n: usize, coupling: f64) -> Result<OperatorSum> {
    let h0 = build_ising_ring(n)?;
    let h1 = build_half_strings(n)?;
    h0.plus(&h1.scaled(real(coupling)))
}

/// Effective Floquet Hamiltonian of the kicked Ising ring at `φ = -1/n`:
/// `-(1/n) Σ σz σz + (-1)^{(n-1)/2} (π/2) Π σx`. Odd `n` only.
pub fn build_dtc_effective(n: usize) -> Result<OperatorSum> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "the effective DTC Hamiltonian is defined for odd n >= 3, got {n}"
        )));
    }
    let mut h = ring_pairs(n, Pauli::Z, real(-1.0 / n as f64))?;
    let sign = if ((n - 1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let all_x: Vec<_> = (0..n).map(|j| (j, Pauli::X)).collect();
    h.add_term(
        real(sign * std::f64::consts::FRAC_PI_2),
        PauliString::from_sites(n, &all_x)?,
    )?;
    Ok(h)
}

/// Local field `Σ_j (h_x σx + h_y σy + h_z σz)` with one `[h_x, h_y, h_z]`
/// per site; zero components produce no term.
pub fn build_field_perturbation(n: usize, fields: &[[f64; 3]]) -> Result<OperatorSum> {
    if fields.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} field vectors for {n} sites",
            fields.len()
        )));
    }
    let mut h = OperatorSum::new(n)?;
    for (j, f) in fields.iter().enumerate() {
        for (&c, p) in f.iter().zip([Pauli::X, Pauli::Y, Pauli::Z]) {
            if c != 0.0 {
                h.add_term(real(c), PauliString::single(n, j, p)?)?;
            }
        }
    }
    Ok(h)
}

/// Axis of a nearest-neighbour perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// `Σ_j σa^(j) σa^(j+1)` around the ring for `a ∈ {x, y}`.
pub fn build_nn_perturbation(n: usize, axis: Axis) -> Result<OperatorSum> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "ring perturbations need n >= 3, got {n}"
        )));
    }
    let p = match axis {
        Axis::X => Pauli::X,
        Axis::Y => Pauli::Y,
    };
    ring_pairs(n, p, real(1.0))
}
