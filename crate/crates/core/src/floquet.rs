//! Kicked Ising ring: a global π spin flip followed by ring Ising evolution.
//!
//! One period is `U_step = U_Ising · U_X` with
//! `U_X = Π_j (-i σx^(j))` and `U_Ising = exp(-i Σ_j φ_j σz^(j) σz^(j+1))`.
//! The effective Hamiltonian `H = i log U_step` is taken on the principal
//! branch, eigenphases in `(-π, π]`.

use faer::{Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonians::build_dtc_effective;
use crate::hilbert::{inner, make_ghz, mz_expectation, GhzSign, StateVector};
use crate::linalg::{
    adjoint, expm, hermitian_eigen, identity, max_abs_diff, reconstruct, scale, unitarity_defect,
    DenseMatrix, C64, ZERO,
};
use crate::spectral::{diagonalize, gs_degeneracy};

/// Unitarity tolerance for [`UnitaryMatrix::new`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Eigenphases this close to ±π are flagged as branch-ambiguous.
pub const BRANCH_TOL: f64 = 1e-9;

/// Replica exponents used to probe the `ρ → 0` limit.
pub const REPLICA_GRID: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Deviation above which [`compare_effective`] falls back to comparing
/// eigenphase multisets.
pub const EXACT_MATCH_TOL: f64 = 1e-9;

/// Per-bond Ising phases `φ_j = J_{j,j+1} τ` on a ring of `n` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DtcProtocol {
    n: usize,
    phases: Vec<f64>,
}

impl DtcProtocol {
    pub fn new(n: usize, phases: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "the kicked Ising ring needs n >= 2, got {n}"
            )));
        }
        crate::check_capacity(n)?;
        if phases.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} bond phases for a ring of {n} sites",
                phases.len()
            )));
        }
        Ok(DtcProtocol { n, phases })
    }

    pub fn uniform(n: usize, phi: f64) -> Result<Self> {
        Self::new(n, vec![phi; n])
    }

    /// Uniform `φ = -1/n`, the point where the effective Hamiltonian takes
    /// the Ising-plus-string form.
    pub fn auto(n: usize) -> Result<Self> {
        Self::uniform(n, -1.0 / n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `Σ_j φ_j s_j s_{j+1}` for the spin configuration `b`.
    pub fn bond_phase(&self, b: usize) -> f64 {
        let spin = |j: usize| if b >> j & 1 == 0 { 1.0 } else { -1.0 };
        self.phases
            .iter()
            .enumerate()
            .map(|(j, phi)| phi * spin(j) * spin((j + 1) % self.n))
            .sum()
    }

    fn flip_phase(&self) -> C64 {
        crate::pauli::Phase::from_quarter_turns(-(self.n as i64)).to_complex()
    }

    /// One period applied to raw amplitudes, without forming the matrix.
    pub fn apply_step(&self, amps: &[C64]) -> Vec<C64> {
        let all = (1usize << self.n) - 1;
        let flip = self.flip_phase();
        let mut out = vec![ZERO; amps.len()];
        for (b, a) in amps.iter().enumerate() {
            let target = b ^ all;
            let (s, c) = self.bond_phase(target).sin_cos();
            out[target] = flip * C64::new(c, -s) * a;
        }
        out
    }
}

/// A square matrix with `U†U = I` to [`UNITARY_TOL`].
#[derive(Debug, Clone)]
pub struct UnitaryMatrix(DenseMatrix);

impl UnitaryMatrix {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        let deviation = unitarity_defect(m.as_ref());
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn as_ref(&self) -> MatRef<'_, C64> {
        self.0.as_ref()
    }

    pub fn into_inner(self) -> DenseMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(self.0.as_ref())
    }

    pub fn compose(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }
}

/// `Π_j (-i σx^(j))`, a phased global spin flip.
pub fn u_x(n: usize) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "qubit count must be at least 1".into(),
        ));
    }
    crate::check_capacity(n)?;
    let dim = 1usize << n;
    let phase = crate::pauli::Phase::from_quarter_turns(-(n as i64)).to_complex();
    let mut m = Mat::<C64>::zeros(dim, dim);
    for b in 0..dim {
        m[(b ^ (dim - 1), b)] = phase;
    }
    Ok(UnitaryMatrix(m))
}

/// Diagonal `exp(-i Σ_j φ_j σz^(j) σz^(j+1))`.
pub fn u_ising(p: &DtcProtocol) -> UnitaryMatrix {
    let dim = 1usize << p.n;
    let mut m = Mat::<C64>::zeros(dim, dim);
    for b in 0..dim {
        let (s, c) = p.bond_phase(b).sin_cos();
        m[(b, b)] = C64::new(c, -s);
    }
    UnitaryMatrix(m)
}

/// One drive period, `U_Ising · U_X` (flip first).
pub fn u_step(p: &DtcProtocol) -> UnitaryMatrix {
    let dim = 1usize << p.n;
    let flip = p.flip_phase();
    let mut m = Mat::<C64>::zeros(dim, dim);
    for b in 0..dim {
        let target = b ^ (dim - 1);
        let (s, c) = p.bond_phase(target).sin_cos();
        m[(target, b)] = flip * C64::new(c, -s);
    }
    UnitaryMatrix(m)
}

/// `⟨M̂z⟩` after each of `steps` drive periods starting from `s0`.
pub fn stroboscopic_run(p: &DtcProtocol, s0: &StateVector, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "at least one step is required".into(),
        ));
    }
    if s0.n() != p.n {
        return Err(Error::SizeMismatch {
            left: p.n,
            right: s0.n(),
        });
    }
    let mut amps = s0.amplitudes().to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        amps = p.apply_step(&amps);
        let state = StateVector::normalized(p.n, amps.clone())?;
        out.push(mz_expectation(&state));
    }
    Ok(out)
}

/// Principal logarithm of a unitary, expressed as `H = i log U`.
#[derive(Debug, Clone)]
pub struct UnitaryLog {
    /// Hermitian `H` with `exp(-iH) = U`.
    pub hamiltonian: DenseMatrix,
    /// Eigenphases `θ_k ∈ (-π, π]` of `U`, paired with the columns of `eigenvectors`.
    pub eigenphases: Vec<f64>,
    pub eigenvectors: DenseMatrix,
    /// Set when some eigenphase lies within [`BRANCH_TOL`] of ±π.
    pub branch_ambiguous: bool,
}

impl UnitaryLog {
    /// Eigenvalues of `H`, i.e. `-θ_k`, ascending.
    pub fn quasienergies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.eigenphases.iter().map(|t| -t).collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

// Mixing constants for the commuting pair (K, S); irrational so that
// accidental collisions of K + cS eigenvalues are non-generic.
const PAIR_MIX: [f64; 4] = [
    0.618_033_988_749_895,
    -1.324_717_957_244_746,
    0.414_213_562_373_095,
    1.839_286_755_214_161,
];
const CLUSTER_GAP: f64 = 1e-6;
const OFFDIAG_TOL: f64 = 1e-12;

/// Orthonormal eigenvectors of a normal matrix from the Hermitian pencil
/// `K + cS`, where `K = (U + U†)/2` and `S = (U - U†)/2i` commute.
/// Near-coincident pencil eigenvalues are re-split with the next constant.
fn normal_eigenvectors(u: MatRef<'_, C64>, level: usize) -> Result<DenseMatrix> {
    let dim = u.nrows();
    let ud = adjoint(u);
    let c = PAIR_MIX[level];
    let half = C64::new(0.5, 0.0);
    let half_i = C64::new(0.0, -0.5);
    let pencil = Mat::<C64>::from_fn(dim, dim, |i, j| {
        let k = (u[(i, j)] + ud[(i, j)]) * half;
        let s = (u[(i, j)] - ud[(i, j)]) * half_i;
        k + s * c
    });
    let (g, mut v, _) = hermitian_eigen(pencil.as_ref())?;
    if level + 1 >= PAIR_MIX.len() {
        return Ok(v);
    }
    let d = v.adjoint() * u * &v;
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && g[end] - g[end - 1] <= CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            let size = end - start;
            let sub = d.as_ref().submatrix(start, start, size, size);
            let off = (0..size)
                .flat_map(|i| (0..size).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| sub[(i, j)].norm())
                .fold(0.0, f64::max);
            if off > OFFDIAG_TOL {
                let w = normal_eigenvectors(sub, level + 1)?;
                let block = v.as_ref().submatrix(0, start, dim, size) * &w;
                v.as_mut()
                    .submatrix_mut(0, start, dim, size)
                    .copy_from(&block);
            }
        }
        start = end;
    }
    Ok(v)
}

fn principal_phase(z: C64) -> f64 {
    let theta = z.arg();
    if theta <= -std::f64::consts::PI {
        theta + 2.0 * std::f64::consts::PI
    } else {
        theta
    }
}

/// `H = i log U` on the principal branch.
pub fn unitary_log(u: &UnitaryMatrix) -> Result<UnitaryLog> {
    let v = normal_eigenvectors(u.as_ref(), 0)?;
    let d = v.adjoint() * u.as_ref() * &v;
    let eigenphases: Vec<f64> = (0..d.nrows()).map(|k| principal_phase(d[(k, k)])).collect();
    let branch_ambiguous = eigenphases
        .iter()
        .any(|t| std::f64::consts::PI - t.abs() <= BRANCH_TOL);
    let diag: Vec<C64> = eigenphases.iter().map(|&t| C64::new(-t, 0.0)).collect();
    let hamiltonian = reconstruct(v.as_ref(), &diag);
    Ok(UnitaryLog {
        hamiltonian,
        eigenphases,
        eigenvectors: v,
        branch_ambiguous,
    })
}

/// Replica estimate `(U^ρ - I)/ρ` of `log U`, with `U^ρ` on the principal branch.
pub fn replica_log(u: &UnitaryMatrix, rho: f64) -> Result<DenseMatrix> {
    let log = unitary_log(u)?;
    replica_from_log(&log, rho)
}

/// [`replica_log`] reusing an existing eigendecomposition.
pub fn replica_from_log(log: &UnitaryLog, rho: f64) -> Result<DenseMatrix> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "replica exponent must lie in (0, 1], got {rho}"
        )));
    }
    let diag: Vec<C64> = log
        .eigenphases
        .iter()
        .map(|&t| (C64::from_polar(1.0, rho * t) - 1.0) / rho)
        .collect();
    Ok(reconstruct(log.eigenvectors.as_ref(), &diag))
}

/// `log U = -iH` from a [`UnitaryLog`].
pub fn principal_log(log: &UnitaryLog) -> DenseMatrix {
    scale(log.hamiltonian.as_ref(), C64::new(0.0, -1.0))
}

/// `max |replica_log(U, ρ) - log U|` for each `ρ` in [`REPLICA_GRID`].
pub fn replica_convergence(u: &UnitaryMatrix) -> Result<Vec<(f64, f64)>> {
    let log = unitary_log(u)?;
    let exact = principal_log(&log);
    REPLICA_GRID
        .iter()
        .map(|&rho| {
            let approx = replica_from_log(&log, rho)?;
            Ok((rho, max_abs_diff(approx.as_ref(), exact.as_ref())))
        })
        .collect()
}

/// `exp(-iH)` for a dense Hermitian `H`.
pub fn evolution_operator(h: MatRef<'_, C64>) -> Result<UnitaryMatrix> {
    UnitaryMatrix::new(expm(scale(h, C64::new(0.0, -1.0)).as_ref()))
}

/// Drive period against the closed-form effective Hamiltonian at `φ = -1/n`.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveComparison {
    pub n: usize,
    pub phi: f64,
    /// `max |U_step - exp(-i H_eff)|`.
    pub max_deviation: f64,
    /// `"unitary"` when `max_deviation` is within [`EXACT_MATCH_TOL`],
    /// otherwise `"eigenphase"`.
    pub criterion: &'static str,
    /// Largest gap between the sorted eigenphase lists, only in fallback mode.
    pub eigenphase_deviation: Option<f64>,
    /// Which GHZ state is the ground state of `H_eff`, if either.
    pub ground_state: Option<GhzSign>,
    pub ground_energy: f64,
    pub ground_nondegenerate: bool,
    pub energy_ghz_plus: f64,
    pub energy_ghz_minus: f64,
    /// `|E(G+) - E(G-)|`.
    pub ghz_splitting: f64,
}

pub fn compare_effective(n: usize) -> Result<EffectiveComparison> {
    if !(3..=11).contains(&n) || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "effective Hamiltonian comparison needs odd n in 3..=11, got {n}"
        )));
    }
    let protocol = DtcProtocol::auto(n)?;
    let step = u_step(&protocol);
    let h_eff = build_dtc_effective(n)?.to_dense()?;
    let evolved = evolution_operator(h_eff.as_ref())?;
    let max_deviation = max_abs_diff(step.as_ref(), evolved.as_ref());

    let (criterion, eigenphase_deviation) = if max_deviation <= EXACT_MATCH_TOL {
        ("unitary", None)
    } else {
        let mut a = unitary_log(&step)?.eigenphases;
        let mut b = unitary_log(&evolved)?.eigenphases;
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let dev = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        ("eigenphase", Some(dev))
    };

    let sd = diagonalize(h_eff.as_ref())?;
    let gs = sd.ground_state();
    let plus = make_ghz(GhzSign::Plus, n)?;
    let minus = make_ghz(GhzSign::Minus, n)?;
    let ground_state = if inner(&plus, &gs)?.norm() > 1.0 - 1e-9 {
        Some(GhzSign::Plus)
    } else if inner(&minus, &gs)?.norm() > 1.0 - 1e-9 {
        Some(GhzSign::Minus)
    } else {
        None
    };
    let energy = |s: &StateVector| -> f64 {
        let hv = crate::linalg::mat_vec(h_eff.as_ref(), s.amplitudes());
        crate::hilbert::inner_raw(s.amplitudes(), &hv)
            .expect("same dimension")
            .re
    };
    let energy_ghz_plus = energy(&plus);
    let energy_ghz_minus = energy(&minus);

    Ok(EffectiveComparison {
        n,
        phi: protocol.phases[0],
        max_deviation,
        criterion,
        eigenphase_deviation,
        ground_state,
        ground_energy: sd.ground_energy(),
        ground_nondegenerate: gs_degeneracy(&sd, sd.default_degeneracy_tol()) == 1,
        energy_ghz_plus,
        energy_ghz_minus,
        ghz_splitting: (energy_ghz_plus - energy_ghz_minus).abs(),
    })
}

/// `U^k` by repeated squaring; handy for multi-period propagators.
pub fn unitary_power(u: &UnitaryMatrix, k: u32) -> UnitaryMatrix {
    let mut result = UnitaryMatrix(identity(u.dim()));
    let mut base = u.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = result.compose(&base);
        }
        base = base.compose(&base);
        e >>= 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::check_flip_symmetry;
    use crate::linalg::{hermiticity_defect, mat_vec};
    use std::f64::consts::PI;

    #[test]
    fn single_site_flip() {
        let u = u_x(1).unwrap();
        assert_eq!(u.as_ref()[(0, 1)], C64::new(0.0, -1.0));
        assert_eq!(u.as_ref()[(1, 0)], C64::new(0.0, -1.0));
        assert_eq!(u.as_ref()[(0, 0)], ZERO);
    }

    #[test]
    fn flip_squares_to_sign() {
        for n in 1..=6 {
            let u = u_x(n).unwrap();
            let sq = u.compose(&u);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let want = scale(identity(1 << n).as_ref(), C64::new(sign, 0.0));
            assert_eq!(max_abs_diff(sq.as_ref(), want.as_ref()), 0.0);
            let down = mat_vec(u.as_ref(), StateVector::all_up(n).unwrap().amplitudes());
            let phase = crate::pauli::Phase::from_quarter_turns(-(n as i64)).to_complex();
            assert_eq!(down[(1 << n) - 1], phase);
        }
    }

    #[test]
    fn ising_diagonal() {
        let zero = DtcProtocol::uniform(4, 0.0).unwrap();
        assert_eq!(
            max_abs_diff(u_ising(&zero).as_ref(), identity(16).as_ref()),
            0.0
        );

        let phases = vec![0.3, -0.7, 1.1, 0.05];
        let p = DtcProtocol::new(4, phases.clone()).unwrap();
        let u = u_ising(&p);
        let total: f64 = phases.iter().sum();
        assert!((u.as_ref()[(0, 0)] - C64::from_polar(1.0, -total)).norm() < 1e-15);

        // φ = π/4 on every bond: enumerate satisfied/broken bonds per state
        let p = DtcProtocol::uniform(4, PI / 4.0).unwrap();
        let u = u_ising(&p);
        for b in 0..16usize {
            let bits: Vec<usize> = (0..4).map(|j| b >> j & 1).collect();
            let signature: i32 = (0..4)
                .map(|j| if bits[j] == bits[(j + 1) % 4] { 1 } else { -1 })
                .sum();
            let want = C64::from_polar(1.0, -PI / 4.0 * signature as f64);
            assert!((u.as_ref()[(b, b)] - want).norm() < 1e-15, "b={b}");
        }
    }

    #[test]
    fn step_is_ising_after_flip() {
        let p = DtcProtocol::uniform(4, 0.0).unwrap();
        assert_eq!(
            max_abs_diff(u_step(&p).as_ref(), u_x(4).unwrap().as_ref()),
            0.0
        );
        let p = DtcProtocol::new(5, vec![0.1, 0.2, -0.3, 0.4, 0.9]).unwrap();
        let product = u_ising(&p).compose(&u_x(5).unwrap());
        assert!(max_abs_diff(u_step(&p).as_ref(), product.as_ref()) < 1e-15);
        assert!(u_step(&p).defect() < 1e-12);
    }

    #[test]
    fn step_matches_effective_hamiltonian_n5() {
        let step = u_step(&DtcProtocol::auto(5).unwrap());
        let h = build_dtc_effective(5).unwrap().to_dense().unwrap();
        let evolved = evolution_operator(h.as_ref()).unwrap();
        assert!(max_abs_diff(step.as_ref(), evolved.as_ref()) < 1e-9);
    }

    #[test]
    fn apply_step_matches_dense() {
        let p = DtcProtocol::new(4, vec![0.4, -0.2, 0.1, 0.7]).unwrap();
        let psi = StateVector::normalized(
            4,
            (0..16)
                .map(|b| C64::new(b as f64 * 0.1 + 0.05, (b % 3) as f64))
                .collect(),
        )
        .unwrap();
        let dense = mat_vec(u_step(&p).as_ref(), psi.amplitudes());
        let sparse = p.apply_step(psi.amplitudes());
        for (a, b) in dense.iter().zip(&sparse) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn stroboscopic_examples() {
        let p = DtcProtocol::auto(7).unwrap();
        let mz = stroboscopic_run(&p, &StateVector::all_up(7).unwrap(), 20).unwrap();
        assert!(mz.windows(2).all(|w| w[0] * w[1] < 0.0));

        let gp = make_ghz(GhzSign::Plus, 6).unwrap();
        let q = DtcProtocol::new(6, vec![0.3, 0.1, -0.8, 0.5, 0.2, 1.3]).unwrap();
        for m in stroboscopic_run(&q, &gp, 15).unwrap() {
            assert!(m.abs() < 1e-14);
        }

        let flip = DtcProtocol::uniform(3, 0.0).unwrap();
        assert_eq!(
            stroboscopic_run(&flip, &StateVector::all_up(3).unwrap(), 1).unwrap(),
            vec![-1.0]
        );
        assert!(stroboscopic_run(&flip, &StateVector::all_up(3).unwrap(), 0).is_err());
        assert!(stroboscopic_run(&flip, &StateVector::all_up(4).unwrap(), 1).is_err());
    }

    #[test]
    fn stroboscopic_states_stay_flip_symmetric() {
        let p = DtcProtocol::new(5, vec![0.3, -1.2, 0.8, 0.1, 2.0]).unwrap();
        let sym = StateVector::normalized(
            5,
            (0..32usize)
                .map(|b| {
                    let r = ((b.min(b ^ 31) * 7919) % 13) as f64 + 1.0;
                    C64::from_polar(r, b as f64 * 0.37)
                })
                .collect(),
        )
        .unwrap();
        assert!(check_flip_symmetry(&sym, 1e-12));
        let mut amps = sym.amplitudes().to_vec();
        for _ in 0..10 {
            amps = p.apply_step(&amps);
            let s = StateVector::normalized(5, amps.clone()).unwrap();
            assert!(check_flip_symmetry(&s, 1e-12));
        }
    }

    #[test]
    fn log_of_identity_and_diagonal() {
        let id = UnitaryMatrix::new(identity(4)).unwrap();
        let log = unitary_log(&id).unwrap();
        assert!(crate::linalg::max_abs(log.hamiltonian.as_ref()) < 1e-15);
        assert!(!log.branch_ambiguous);

        let mut d = Mat::<C64>::zeros(2, 2);
        d[(0, 0)] = C64::from_polar(1.0, -0.4);
        d[(1, 1)] = C64::from_polar(1.0, -2.9);
        let log = unitary_log(&UnitaryMatrix::new(d).unwrap()).unwrap();
        assert!((log.hamiltonian[(0, 0)] - C64::new(0.4, 0.0)).norm() < 1e-14);
        assert!((log.hamiltonian[(1, 1)] - C64::new(2.9, 0.0)).norm() < 1e-14);
        assert!(log.hamiltonian[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn log_flags_branch_boundary() {
        let mut d = identity(2);
        d[(1, 1)] = C64::new(-1.0, 0.0);
        let log = unitary_log(&UnitaryMatrix::new(d).unwrap()).unwrap();
        assert!(log.branch_ambiguous);
        // -1 maps onto +π, so H has eigenvalue -π
        assert!(log.eigenphases.iter().any(|t| (t - PI).abs() < 1e-15));
    }

    #[test]
    fn log_of_step_n7() {
        let step = u_step(&DtcProtocol::auto(7).unwrap());
        let log = unitary_log(&step).unwrap();
        assert!(!log.branch_ambiguous);
        assert!(hermiticity_defect(log.hamiltonian.as_ref()) < 1e-9);
        let back = evolution_operator(log.hamiltonian.as_ref()).unwrap();
        assert!(max_abs_diff(back.as_ref(), step.as_ref()) < 1e-9);

        let mut e = [0.0; 2];
        for (slot, sign) in e.iter_mut().zip([GhzSign::Plus, GhzSign::Minus]) {
            let g = make_ghz(sign, 7).unwrap();
            let hg = mat_vec(log.hamiltonian.as_ref(), g.amplitudes());
            let energy = crate::hilbert::inner_raw(g.amplitudes(), &hg).unwrap().re;
            let residual = hg
                .iter()
                .zip(g.amplitudes())
                .map(|(a, b)| (a - b * energy).norm())
                .fold(0.0, f64::max);
            assert!(residual < 1e-8);
            *slot = energy;
        }
        assert!(((e[0] - e[1]).abs() - PI).abs() < 1e-8);
    }

    #[test]
    fn log_splits_colliding_pencil_eigenvalues() {
        // eigenphases θ1 + θ2 = 2·atan(c) collide in the first pencil
        let c = PAIR_MIX[0];
        let phi0 = c.atan();
        let (t1, t2) = (phi0 + 0.9, phi0 - 0.9);
        let mut d = Mat::<C64>::zeros(2, 2);
        d[(0, 0)] = C64::from_polar(1.0, t1);
        d[(1, 1)] = C64::from_polar(1.0, t2);
        // rotate into a non-trivial basis
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = Mat::<C64>::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(s, 0.0),
            (0, 1) => C64::new(0.0, s),
            (1, 0) => C64::new(0.0, s),
            _ => C64::new(s, 0.0),
        });
        let u = UnitaryMatrix::new(&q * &d * q.adjoint()).unwrap();
        let log = unitary_log(&u).unwrap();
        let back = evolution_operator(log.hamiltonian.as_ref()).unwrap();
        assert!(max_abs_diff(back.as_ref(), u.as_ref()) < 1e-12);
    }

    #[test]
    fn replica_examples() {
        let step = u_step(&DtcProtocol::auto(3).unwrap());
        let r1 = replica_log(&step, 1.0).unwrap();
        let want = Mat::<C64>::from_fn(8, 8, |i, j| {
            step.as_ref()[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { ZERO }
        });
        assert!(max_abs_diff(r1.as_ref(), want.as_ref()) < 1e-12);

        let id = UnitaryMatrix::new(identity(4)).unwrap();
        for rho in REPLICA_GRID {
            assert!(crate::linalg::max_abs(replica_log(&id, rho).unwrap().as_ref()) < 1e-15);
        }
        assert!(replica_log(&id, 0.0).is_err());
        assert!(replica_log(&id, 1.5).is_err());

        let errs = replica_convergence(&step).unwrap();
        assert!(errs.windows(2).all(|w| w[1].1 < w[0].1));
        for (rho, err) in errs {
            // Taylor remainder: ≤ ρ‖L‖²/2 with ‖L‖ ≤ π
            assert!(err <= rho * PI * PI, "{rho} {err}");
        }
    }

    #[test]
    fn comparison_rejects_even_n() {
        assert!(compare_effective(6).is_err());
        assert!(compare_effective(13).is_err());
    }

    #[test]
    fn comparison_n7() {
        let report = compare_effective(7).unwrap();
        assert!(report.max_deviation <= 1e-9, "{}", report.max_deviation);
        assert_eq!(report.criterion, "unitary");
        assert_eq!(report.ground_state, Some(GhzSign::Plus));
        assert!(report.ground_nondegenerate);
        assert!((report.ghz_splitting - PI).abs() < 1e-12);
        assert!(report.energy_ghz_plus < report.energy_ghz_minus);
    }

    #[test]
    fn unitary_power_matches_repeated_product() {
        let step = u_step(&DtcProtocol::auto(3).unwrap());
        let p3 = unitary_power(&step, 3);
        let direct = step.compose(&step).compose(&step);
        assert!(max_abs_diff(p3.as_ref(), direct.as_ref()) < 1e-14);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = scale(identity(2).as_ref(), C64::new(2.0, 0.0));
        assert!(matches!(
            UnitaryMatrix::new(m),
            Err(Error::NotUnitary { .. })
        ));
    }
}
