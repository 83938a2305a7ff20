//! Exact diagonalization and correlation functions in Lehmann form.
//!
//! Every correlation function here is a finite sum of Bohr harmonics,
//! `f(t) = Σ_l w_l e^{-i ω_l t}` with `ω_l = ε_k - ε_j`, built once in the
//! energy eigenbasis ([`LehmannSeries`]) and then sampled on a time grid.
//! Kets evolve with `e^{-iHt}`, so a ground-state correlation oscillates as
//! `e^{-i(ε_1 - ε_0)t}` with a positive frequency.

use std::fmt::Write as _;

use faer::{Mat, MatRef};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{magnetization_of, StateVector};
use crate::linalg::{
    hermitian_eigen, hermiticity_defect, identity, max_abs, max_abs_diff, qubits_for_dim,
    reconstruct, DenseMatrix, C64, ZERO,
};
use crate::pauli::{OperatorSum, Pauli, PauliString};

/// Input matrices must be Hermitian to this tolerance (scaled by the largest entry).
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Ground-state degeneracy tolerance, relative to the spectral span.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

/// Bohr frequencies closer than this are one harmonic when counting.
pub const HARMONIC_MERGE_TOL: f64 = 1e-9;

/// Default harmonic weight threshold, relative to the total weight `f(0)`.
pub const DEFAULT_WEIGHT_TOL: f64 = 1e-3;

/// Lines this close in frequency are combined before sampling; the induced
/// error is at most `1e-12 · t · |w|`.
const SAMPLING_MERGE_TOL: f64 = 1e-12;

/// Lines lighter than this fraction of the total weight are dropped.
const PRUNE_REL: f64 = 1e-20;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    n: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
    real: bool,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, C64> {
        self.eigenvectors.as_ref()
    }

    /// Whether the eigenvectors are real (the input matrix was real symmetric).
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.col(k).iter().copied().collect()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> StateVector {
        StateVector::normalized(self.n, self.eigenvector(0)).expect("eigenvectors have unit norm")
    }

    pub fn span(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    /// [`DEFAULT_DEGENERACY_TOL`] scaled by the spectral span, never below
    /// [`DEFAULT_DEGENERACY_TOL`] itself.
    pub fn default_degeneracy_tol(&self) -> f64 {
        DEFAULT_DEGENERACY_TOL * self.span().max(1.0)
    }

    /// `max |V diag(ε) V† - H|`.
    pub fn reconstruction_error(&self, h: MatRef<'_, C64>) -> f64 {
        let d: Vec<C64> = self.eigenvalues.iter().map(|&e| C64::new(e, 0.0)).collect();
        max_abs_diff(reconstruct(self.eigenvectors(), &d).as_ref(), h)
    }

    /// `max |V†V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        max_abs_diff(gram.as_ref(), identity(self.dim()).as_ref())
    }

    /// `⟨E_k|ψ⟩` for every eigenvector.
    fn project(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim())
            .map(|k| {
                self.eigenvectors
                    .col(k)
                    .iter()
                    .zip(v)
                    .map(|(e, x)| e.conj() * x)
                    .sum()
            })
            .collect()
    }

    /// `|⟨E_j|M̂z|E_k⟩|²` for all pairs, row `j`, column `k`.
    fn mz_matrix_elements_sq(&self) -> Mat<f64> {
        let dim = self.dim();
        let mz: Vec<f64> = (0..dim).map(|b| magnetization_of(self.n, b)).collect();
        if self.real {
            let v = Mat::<f64>::from_fn(dim, dim, |i, j| self.eigenvectors[(i, j)].re);
            let dv = Mat::<f64>::from_fn(dim, dim, |i, j| mz[i] * v[(i, j)]);
            let m = v.transpose() * &dv;
            Mat::from_fn(dim, dim, |j, k| m[(j, k)] * m[(j, k)])
        } else {
            let v = &self.eigenvectors;
            let dv = Mat::<C64>::from_fn(dim, dim, |i, j| v[(i, j)] * mz[i]);
            let m = v.adjoint() * &dv;
            Mat::from_fn(dim, dim, |j, k| m[(j, k)].norm_sqr())
        }
    }
}

/// Dense diagonalization of a Hermitian `2^n × 2^n` matrix.
pub fn diagonalize(h: MatRef<'_, C64>) -> Result<SpectralDecomposition> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, expected square",
            h.nrows(),
            h.ncols()
        )));
    }
    let n = qubits_for_dim(h.nrows())?;
    crate::check_capacity(n)?;
    let deviation = hermiticity_defect(h);
    if deviation > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let (eigenvalues, eigenvectors, real) = hermitian_eigen(h)?;
    Ok(SpectralDecomposition {
        n,
        eigenvalues,
        eigenvectors,
        real,
    })
}

/// Shorthand for diagonalizing `op.to_dense()`.
pub fn diagonalize_sum(op: &OperatorSum) -> Result<SpectralDecomposition> {
    diagonalize(op.to_dense()?.as_ref())
}

/// Number of eigenvalues within `tol` of the minimum.
pub fn gs_degeneracy(sd: &SpectralDecomposition, tol: f64) -> usize {
    let e0 = sd.ground_energy();
    sd.eigenvalues
        .iter()
        .take_while(|&&e| e - e0 <= tol)
        .count()
}

/// `M̂z = Σ_j σz^(j) / n` as an operator sum.
pub fn mz_operator(n: usize) -> Result<OperatorSum> {
    let w = C64::new(1.0 / n as f64, 0.0);
    OperatorSum::from_terms(
        n,
        (0..n)
            .map(|j| PauliString::single(n, j, Pauli::Z).map(|p| (w, p)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Uniform sampling grid `t_i = t0 + i·Δt`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, count: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive and finite, got dt = {dt}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "time grid needs at least 2 samples, got {count}"
            )));
        }
        Ok(TimeGrid { t0, dt, count })
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.time(i))
    }
}

/// Samples of a correlation function on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub grid: TimeGrid,
    pub values: Vec<C64>,
}

impl TimeSeries {
    /// CSV with header `t,re,im,abs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,abs\n");
        for (t, v) in self.grid.times().zip(&self.values) {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                t,
                v.re,
                v.im,
                v.norm()
            );
        }
        out
    }
}

/// One Bohr harmonic `w · e^{-iωt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohrLine {
    pub omega: f64,
    pub weight: C64,
}

/// Correlation function as a sum of Bohr harmonics, sorted by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct LehmannSeries {
    lines: Vec<BohrLine>,
}

impl LehmannSeries {
    /// Sorts the lines, drops negligible weights and combines coincident
    /// frequencies.
    pub fn new(mut lines: Vec<BohrLine>) -> Self {
        let total: f64 = lines.iter().map(|l| l.weight.norm()).sum();
        lines.retain(|l| l.weight.norm() > PRUNE_REL * total);
        lines.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        LehmannSeries {
            lines: merge_lines(&lines, SAMPLING_MERGE_TOL),
        }
    }

    pub fn lines(&self) -> &[BohrLine] {
        &self.lines
    }

    /// `f(0) = Σ_l w_l`.
    pub fn total_weight(&self) -> C64 {
        self.lines.iter().map(|l| l.weight).sum()
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.lines
            .iter()
            .map(|l| {
                let (s, c) = (l.omega * t).sin_cos();
                l.weight * C64::new(c, -s)
            })
            .sum()
    }

    pub fn sample(&self, grid: &TimeGrid) -> TimeSeries {
        TimeSeries {
            grid: *grid,
            values: grid.times().map(|t| self.eval(t)).collect(),
        }
    }

    /// Lines combined within `tol` (single linkage on sorted frequencies).
    pub fn harmonics(&self, tol: f64) -> Vec<BohrLine> {
        merge_lines(&self.lines, tol)
    }

    /// Harmonic with the largest `|w|` after merging within
    /// [`HARMONIC_MERGE_TOL`].
    pub fn dominant(&self) -> Option<BohrLine> {
        self.harmonics(HARMONIC_MERGE_TOL)
            .into_iter()
            .max_by(|a, b| a.weight.norm().total_cmp(&b.weight.norm()))
    }

    /// Number of harmonics (merged within [`HARMONIC_MERGE_TOL`]) whose `|w|`
    /// exceeds `weight_tol` times the summed `|w|`.
    pub fn count_harmonics(&self, weight_tol: f64) -> usize {
        let merged = self.harmonics(HARMONIC_MERGE_TOL);
        let total: f64 = merged.iter().map(|l| l.weight.norm()).sum();
        merged
            .iter()
            .filter(|l| l.weight.norm() > weight_tol * total)
            .count()
    }
}

fn merge_lines(sorted: &[BohrLine], tol: f64) -> Vec<BohrLine> {
    let mut out: Vec<BohrLine> = Vec::new();
    let mut last_omega = f64::NEG_INFINITY;
    // weighted frequency sum for the current cluster
    let mut acc = (0.0f64, 0.0f64);
    for l in sorted {
        let w = l.weight.norm();
        match out.last_mut() {
            Some(cur) if l.omega - last_omega <= tol => {
                cur.weight += l.weight;
                acc.0 += w * l.omega;
                acc.1 += w;
                if acc.1 > 0.0 {
                    cur.omega = acc.0 / acc.1;
                }
            }
            _ => {
                out.push(*l);
                acc = (w * l.omega, w);
            }
        }
        last_omega = l.omega;
    }
    out
}

fn require_nondegenerate(sd: &SpectralDecomposition) -> Result<()> {
    let m = gs_degeneracy(sd, sd.default_degeneracy_tol());
    if m > 1 {
        return Err(Error::DegenerateGroundState { degeneracy: m });
    }
    Ok(())
}

fn check_operator(sd: &SpectralDecomposition, op: &OperatorSum) -> Result<()> {
    if op.n() != sd.n {
        return Err(Error::SizeMismatch {
            left: sd.n,
            right: op.n(),
        });
    }
    if !op.is_hermitian() {
        return Err(Error::InvalidArgument(
            "correlation operator must be Hermitian".into(),
        ));
    }
    Ok(())
}

/// Lehmann lines of `⟨E0|A(t) A(0)|E0⟩` for Hermitian `A`:
/// weights `|⟨E_k|A|E_0⟩|²` at `ω = ε_k - ε_0`.
pub fn lehmann_zero_t(sd: &SpectralDecomposition, op: &OperatorSum) -> Result<LehmannSeries> {
    check_operator(sd, op)?;
    require_nondegenerate(sd)?;
    let applied = op.apply(&sd.eigenvector(0))?;
    let e0 = sd.ground_energy();
    let lines = sd
        .project(&applied)
        .into_iter()
        .zip(&sd.eigenvalues)
        .map(|(a, &e)| BohrLine {
            omega: e - e0,
            weight: C64::new(a.norm_sqr(), 0.0),
        })
        .collect();
    Ok(LehmannSeries::new(lines))
}

/// Ground-state correlation `⟨E0|e^{iHt} A e^{-iHt} A|E0⟩`; requires a
/// nondegenerate ground state.
pub fn correlation_zero_t(
    sd: &SpectralDecomposition,
    op: &OperatorSum,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    Ok(lehmann_zero_t(sd, op)?.sample(grid))
}

/// Lehmann lines of `⟨E0|σz^(i)(t) σz^(j)(0)|E0⟩`; sites are 1-based.
pub fn lehmann_local_zz(sd: &SpectralDecomposition, i: usize, j: usize) -> Result<LehmannSeries> {
    let n = sd.n;
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "sites ({i}, {j}) out of range 1..={n}"
        )));
    }
    require_nondegenerate(sd)?;
    let zi = PauliString::single(n, i - 1, Pauli::Z)?;
    let zj = PauliString::single(n, j - 1, Pauli::Z)?;
    let gs = sd.eigenvector(0);
    let sz = |p: PauliString| -> Vec<C64> {
        let mut out = vec![ZERO; gs.len()];
        for (b, a) in gs.iter().enumerate() {
            let (r, ph) = p.apply(b);
            out[r] += ph * a;
        }
        out
    };
    let left = sd.project(&sz(zi));
    let right = sd.project(&sz(zj));
    let e0 = sd.ground_energy();
    let lines = left
        .iter()
        .zip(&right)
        .zip(&sd.eigenvalues)
        .map(|((a, b), &e)| BohrLine {
            omega: e - e0,
            weight: a.conj() * b,
        })
        .collect();
    Ok(LehmannSeries::new(lines))
}

pub fn correlation_local_zz(
    sd: &SpectralDecomposition,
    i: usize,
    j: usize,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    Ok(lehmann_local_zz(sd, i, j)?.sample(grid))
}

/// Lehmann lines of the `M̂z` correlation averaged uniformly over the
/// ground-state manifold (eigenvalues within `tol` of the minimum).
pub fn lehmann_mixed_gs(sd: &SpectralDecomposition, tol: f64) -> LehmannSeries {
    let m = gs_degeneracy(sd, tol);
    let mut lines = Vec::with_capacity(m * sd.dim());
    for g in 0..m {
        let gs = sd.eigenvector(g);
        let applied: Vec<C64> = gs
            .iter()
            .enumerate()
            .map(|(b, a)| a * magnetization_of(sd.n, b))
            .collect();
        let eg = sd.eigenvalues[g];
        for (a, &e) in sd.project(&applied).into_iter().zip(&sd.eigenvalues) {
            lines.push(BohrLine {
                omega: e - eg,
                weight: C64::new(a.norm_sqr() / m as f64, 0.0),
            });
        }
    }
    LehmannSeries::new(lines)
}

/// `M̂z` correlation in the zero-temperature density matrix
/// `ρ = (1/m) Σ_i |E0^(i)⟩⟨E0^(i)|`.
pub fn correlation_mixed_gs(sd: &SpectralDecomposition, tol: f64, grid: &TimeGrid) -> TimeSeries {
    lehmann_mixed_gs(sd, tol).sample(grid)
}

/// Boltzmann weights `e^{-βε_j}/Z`, shifted by the ground energy for stability.
pub fn boltzmann_weights(sd: &SpectralDecomposition, beta: f64) -> Vec<f64> {
    let e0 = sd.ground_energy();
    let raw: Vec<f64> = sd
        .eigenvalues
        .iter()
        .map(|&e| (-beta * (e - e0)).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / z).collect()
}

/// Lehmann lines of the thermal `M̂z` correlation:
/// weights `Z⁻¹ e^{-βε_j} |⟨E_j|M̂z|E_k⟩|²` at `ω = ε_k - ε_j`.
pub fn lehmann_thermal(sd: &SpectralDecomposition, beta: f64) -> Result<LehmannSeries> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "inverse temperature must be finite and non-negative, got {beta}"
        )));
    }
    let p = boltzmann_weights(sd, beta);
    let m2 = sd.mz_matrix_elements_sq();
    let dim = sd.dim();
    let total: f64 = (0..dim)
        .map(|j| p[j] * (0..dim).map(|k| m2[(j, k)]).sum::<f64>())
        .sum();
    let cutoff = PRUNE_REL * total;
    let mut lines = Vec::new();
    for j in 0..dim {
        if p[j] == 0.0 {
            continue;
        }
        let ej = sd.eigenvalues[j];
        for k in 0..dim {
            let w = p[j] * m2[(j, k)];
            if w > cutoff {
                lines.push(BohrLine {
                    omega: sd.eigenvalues[k] - ej,
                    weight: C64::new(w, 0.0),
                });
            }
        }
    }
    Ok(LehmannSeries::new(lines))
}

/// Thermal `M̂z` correlation in `ρ = Z⁻¹ e^{-βH}`.
pub fn correlation_thermal(
    sd: &SpectralDecomposition,
    beta: f64,
    grid: &TimeGrid,
) -> Result<TimeSeries> {
    Ok(lehmann_thermal(sd, beta)?.sample(grid))
}

/// Distinct Bohr frequencies (merged within [`HARMONIC_MERGE_TOL`]) whose
/// weight exceeds `weight_tol` of the total. `beta = ∞` selects the
/// ground-state manifold.
pub fn count_bohr_harmonics(
    sd: &SpectralDecomposition,
    beta: f64,
    weight_tol: f64,
) -> Result<usize> {
    let series = if beta == f64::INFINITY {
        lehmann_mixed_gs(sd, sd.default_degeneracy_tol())
    } else {
        lehmann_thermal(sd, beta)?
    };
    Ok(series.count_harmonics(weight_tol))
}

/// Discrete Fourier transform of a sampled series.
///
/// `coefficients[b] = Σ_m f(t_m) e^{-i ω_b m Δt}` without normalization and
/// `power = |coefficient|² / count`, so that `Σ power = Σ_m |f(t_m)|²`.
/// Bins are ordered by ascending angular frequency
/// `ω_b = 2π·b / (count·Δt)`, `b ∈ [-⌊count/2⌋, ⌈count/2⌉)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumData {
    pub omegas: Vec<f64>,
    pub power: Vec<f64>,
    pub coefficients: Vec<C64>,
}

impl SpectrumData {
    /// CSV with header `omega,power`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,power\n");
        for (w, p) in self.omegas.iter().zip(&self.power) {
            let _ = writeln!(out, "{w:.16e},{p:.16e}");
        }
        out
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Index of the strongest bin.
    pub fn peak_bin(&self) -> usize {
        self.power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Local maxima (cyclic neighbours) carrying at least `rel` of the
    /// maximum power.
    pub fn count_peaks(&self, rel: f64) -> usize {
        let len = self.power.len();
        let max = self.power.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return 0;
        }
        (0..len)
            .filter(|&i| {
                let p = self.power[i];
                let prev = self.power[(i + len - 1) % len];
                let next = self.power[(i + 1) % len];
                p >= rel * max && p > prev && p >= next
            })
            .count()
    }
}

fn fft_shift_index(count: usize, ascending: usize) -> usize {
    // ascending position 0 is bin -⌊count/2⌋
    (ascending + count - count / 2) % count
}

pub fn power_spectrum(ts: &TimeSeries) -> Result<SpectrumData> {
    let count = ts.values.len();
    if count < 2 || count != ts.grid.count {
        return Err(Error::InvalidArgument(format!(
            "spectrum needs a consistent grid of at least 2 samples, got {count}"
        )));
    }
    let mut buf = ts.values.clone();
    FftPlanner::<f64>::new()
        .plan_fft_forward(count)
        .process(&mut buf);
    let span = count as f64 * ts.grid.dt;
    let half = (count / 2) as i64;
    let mut omegas = Vec::with_capacity(count);
    let mut power = Vec::with_capacity(count);
    let mut coefficients = Vec::with_capacity(count);
    for pos in 0..count {
        let bin = pos as i64 - half;
        let c = buf[fft_shift_index(count, pos)];
        omegas.push(2.0 * std::f64::consts::PI * bin as f64 / span);
        power.push(c.norm_sqr() / count as f64);
        coefficients.push(c);
    }
    Ok(SpectrumData {
        omegas,
        power,
        coefficients,
    })
}

/// Inverse of [`power_spectrum`]'s transform: recovers the samples from the
/// coefficients.
pub fn inverse_transform(spectrum: &SpectrumData) -> Vec<C64> {
    let count = spectrum.coefficients.len();
    let mut buf = vec![ZERO; count];
    for (pos, c) in spectrum.coefficients.iter().enumerate() {
        buf[fft_shift_index(count, pos)] = *c;
    }
    FftPlanner::<f64>::new()
        .plan_fft_inverse(count)
        .process(&mut buf);
    let inv = 1.0 / count as f64;
    buf.into_iter().map(|c| c * inv).collect()
}
