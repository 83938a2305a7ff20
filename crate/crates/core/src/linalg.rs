//! Dense complex matrix helpers shared by the solvers.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix; the working representation for Hamiltonians and unitaries.
pub type DenseMatrix = Mat<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Qubit count of a `2^n`-dimensional space.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn identity(dim: usize) -> DenseMatrix {
    Mat::from_fn(dim, dim, |i, j| if i == j { ONE } else { ZERO })
}

pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut out = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out = out.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    out
}

/// `max |H - H†|`; zero for an exactly Hermitian matrix.
pub fn hermiticity_defect(h: MatRef<'_, C64>) -> f64 {
    if h.nrows() != h.ncols() {
        return f64::INFINITY;
    }
    let mut out = 0.0f64;
    for j in 0..h.ncols() {
        for i in 0..=j {
            out = out.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    out
}

/// `max |U†U - I|`.
pub fn unitarity_defect(u: MatRef<'_, C64>) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let gram = u.adjoint() * u;
    max_abs_diff(gram.as_ref(), identity(u.nrows()).as_ref())
}

pub fn adjoint(m: MatRef<'_, C64>) -> DenseMatrix {
    m.adjoint().to_owned()
}

pub fn mat_vec(m: MatRef<'_, C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), v.len());
    let mut out = vec![ZERO; m.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj == ZERO {
            continue;
        }
        let col = m.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += col[i] * vj;
        }
    }
    out
}

pub fn scale(m: MatRef<'_, C64>, s: C64) -> DenseMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

/// `V diag(d) V†` for a unitary (or any square) `V`.
pub fn reconstruct(v: MatRef<'_, C64>, d: &[C64]) -> DenseMatrix {
    let vd = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * d[j]);
    &vd * v.adjoint()
}

fn norm_one(m: MatRef<'_, C64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// Works for any square matrix; the series is summed at 1-norm ≤ 1/2 where
/// 24 terms are far below machine precision.
pub fn expm(a: MatRef<'_, C64>) -> DenseMatrix {
    let dim = a.nrows();
    assert_eq!(dim, a.ncols());
    let norm = norm_one(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = scale(a, C64::new(0.5f64.powi(squarings), 0.0));

    let mut result = identity(dim);
    let mut term = identity(dim);
    for k in 1..=24 {
        term = &term * &scaled;
        let inv_k = C64::new(1.0 / k as f64, 0.0);
        for j in 0..dim {
            for i in 0..dim {
                term[(i, j)] *= inv_k;
                result[(i, j)] += term[(i, j)];
            }
        }
        if max_abs(term.as_ref()) < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
///
/// Matrices whose imaginary part vanishes are routed through the real
/// symmetric solver, which is roughly four times faster. The returned flag
/// reports which path was taken, i.e. whether the eigenvectors are real.
pub fn hermitian_eigen(h: MatRef<'_, C64>) -> Result<(Vec<f64>, DenseMatrix, bool)> {
    let dim = h.nrows();
    if dim != h.ncols() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, expected square",
            h.nrows(),
            h.ncols()
        )));
    }
    let max_im = (0..dim)
        .flat_map(|j| (0..dim).map(move |i| (i, j)))
        .map(|(i, j)| h[(i, j)].im.abs())
        .fold(0.0f64, f64::max);
    let scale = max_abs(h).max(1.0);

    if max_im <= 1e-15 * scale {
        let real = Mat::<f64>::from_fn(dim, dim, |i, j| h[(i, j)].re);
        let evd = real
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        drop(real);
        let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        let u = evd.U();
        let vectors = Mat::from_fn(dim, dim, |i, j| C64::new(u[(i, j)], 0.0));
        Ok((values, vectors, true))
    } else {
        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok((values, evd.U().to_owned(), false))
    }
}
