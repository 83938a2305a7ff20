//! State vectors over the computational (σz) basis, GHZ states and the total
//! magnetization `M̂z = Σ_j σz^(j) / n`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::check_capacity;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::pauli::OperatorSum;

/// Constructed states must have unit norm to this tolerance.
pub const NORM_TOL: f64 = 1e-10;

/// Normalized vector of `2^n` amplitudes; bit `j` of the index is site `j + 1`,
/// zero meaning spin up.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

/// Which member of the GHZ pair: `G± = (|↑…↑⟩ ± |↓…↓⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GhzSign {
    #[serde(rename = "G+")]
    Plus,
    #[serde(rename = "G-")]
    Minus,
}

impl GhzSign {
    pub fn flipped(self) -> Self {
        match self {
            GhzSign::Plus => GhzSign::Minus,
            GhzSign::Minus => GhzSign::Plus,
        }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "qubit count must be at least 1".into(),
        ));
    }
    check_capacity(n)
}

fn check_dim(n: usize, len: usize) -> Result<()> {
    check_qubits(n)?;
    if len != 1usize << n {
        return Err(Error::InvalidArgument(format!(
            "{len} amplitudes given for {n} qubits"
        )));
    }
    Ok(())
}

fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (to [`NORM_TOL`]).
    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_dim(n, amps.len())?;
        let norm = norm_sqr(&amps).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector { n, amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n: usize, mut amps: Vec<C64>) -> Result<Self> {
        check_dim(n, amps.len())?;
        let norm = norm_sqr(&amps).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(StateVector { n, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        if index >= 1usize << n {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn all_up(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn all_down(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Self::basis(n, (1usize << n) - 1)
    }

    /// Equal-weight superposition of every basis state.
    pub fn uniform(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(StateVector {
            n,
            amps: vec![a; dim],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    /// CSV with header `index,re,im`, indices ascending.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (b, a) in self.amps.iter().enumerate() {
            let _ = writeln!(out, "{b},{:.16e},{:.16e}", a.re, a.im);
        }
        out
    }

    /// Reads the format written by [`StateVector::to_csv`]. Missing indices are
    /// zero; the result must be normalized.
    pub fn from_csv(n: usize, text: &str) -> Result<Self> {
        check_qubits(n)?;
        let mut amps = vec![ZERO; 1 << n];
        let mut last: Option<usize> = None;
        for (lineno, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
            if fields.len() != 3 {
                return Err(bad("expected index,re,im"));
            }
            let idx: usize = fields[0].parse().map_err(|_| bad("invalid index"))?;
            if idx >= amps.len() || last.is_some_and(|l| idx <= l) {
                return Err(bad("index out of range or not ascending"));
            }
            last = Some(idx);
            let re: f64 = fields[1].parse().map_err(|_| bad("invalid re"))?;
            let im: f64 = fields[2].parse().map_err(|_| bad("invalid im"))?;
            amps[idx] = C64::new(re, im);
        }
        Self::from_amplitudes(n, amps)
    }
}

/// `G± = (|↑…↑⟩ ± |↓…↓⟩)/√2`.
pub fn make_ghz(sign: GhzSign, n: usize) -> Result<StateVector> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![ZERO; dim];
    amps[0] = C64::new(h, 0.0);
    amps[dim - 1] = match sign {
        GhzSign::Plus => C64::new(h, 0.0),
        GhzSign::Minus => C64::new(-h, 0.0),
    };
    Ok(StateVector { n, amps })
}

/// Eigenvalue of `M̂z` on basis index `b`: `(n - 2·popcount(b)) / n`.
pub fn magnetization_of(n: usize, b: usize) -> f64 {
    (n as f64 - 2.0 * b.count_ones() as f64) / n as f64
}

/// `M̂z |s⟩`, which is generally not normalized.
pub fn apply_mz(s: &StateVector) -> Vec<C64> {
    s.amps
        .iter()
        .enumerate()
        .map(|(b, &a)| a * magnetization_of(s.n, b))
        .collect()
}

/// `⟨s|M̂z|s⟩`.
pub fn mz_expectation(s: &StateVector) -> f64 {
    s.amps
        .iter()
        .enumerate()
        .map(|(b, a)| a.norm_sqr() * magnetization_of(s.n, b))
        .sum()
}

/// Order parameter `⟨s|M̂z²|s⟩`.
pub fn order_parameter(s: &StateVector) -> f64 {
    s.amps
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let m = magnetization_of(s.n, b);
            a.norm_sqr() * m * m
        })
        .sum()
}

/// One eigenspace of `M̂z`: `k` down spins, eigenvalue `(n - 2k)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationLevel {
    pub k: usize,
    pub m: f64,
    pub degeneracy: u64,
}

/// The `n + 1` eigenvalues of `M̂z` with their binomial degeneracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationTable {
    pub n: usize,
    pub levels: Vec<MagnetizationLevel>,
}

impl MagnetizationTable {
    pub fn total_degeneracy(&self) -> u64 {
        self.levels.iter().map(|l| l.degeneracy).sum()
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn mz_eigendata(n: usize) -> Result<MagnetizationTable> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "qubit count must be at least 1".into(),
        ));
    }
    let levels = (0..=n)
        .map(|k| MagnetizationLevel {
            k,
            m: (n as f64 - 2.0 * k as f64) / n as f64,
            degeneracy: binomial(n as u64, k as u64),
        })
        .collect();
    Ok(MagnetizationTable { n, levels })
}

/// Whether `|amp(b)| = |amp(b̄)|` within `tol` for every basis index, where
/// `b̄` flips all spins. This pairs `|m_k, d⟩` with its global spin flip in
/// `|m_{n-k}, d⟩` and implies `⟨M̂z⟩ = 0`.
pub fn check_flip_symmetry(s: &StateVector, tol: f64) -> bool {
    let all = s.dim() - 1;
    s.amps
        .iter()
        .enumerate()
        .all(|(b, a)| (a.norm() - s.amps[b ^ all].norm()).abs() <= tol)
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    inner_raw(&a.amps, &b.amps).ok_or(Error::SizeMismatch {
        left: a.n,
        right: b.n,
    })
}

pub(crate) fn inner_raw(a: &[C64], b: &[C64]) -> Option<C64> {
    (a.len() == b.len()).then(|| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
}

/// `⟨s|op|s⟩`.
pub fn expectation(op: &OperatorSum, s: &StateVector) -> Result<C64> {
    if op.n() != s.n {
        return Err(Error::SizeMismatch {
            left: op.n(),
            right: s.n,
        });
    }
    let applied = op.apply(&s.amps)?;
    Ok(inner_raw(&s.amps, &applied).expect("dimensions checked"))
}
