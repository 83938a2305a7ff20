//! Pauli strings in the symplectic (x-mask, z-mask, quarter-phase) encoding and
//! weighted sums of them.
//!
//! Site `j` (0-based) of a string is bit `j` of both masks:
//!
//! | (x, z) | operator |
//! |--------|----------|
//! | (0, 0) | I        |
//! | (1, 0) | X        |
//! | (0, 1) | Z        |
//! | (1, 1) | Y        |
//!
//! With phase `+1` a string is the plain tensor product of those operators.
//! Since `Y = i X Z` per site, a string equals `phase · i^{|x∧z|} · X^x Z^z`,
//! which is what all the phase bookkeeping below is built on.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{qubits_for_dim, DenseMatrix, C64, ZERO};
use crate::{check_capacity, MAX_DENSE_QUBITS};

/// Coefficients below this modulus are dropped by [`pauli_decompose`].
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

/// Imaginary parts up to this size still count as real in
/// [`OperatorSum::is_hermitian`].
pub const HERMITIAN_COEFF_TOL: f64 = 1e-12;

/// Single-site Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    /// `(x, z)` bits of the operator.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A fourth root of unity `i^k`, stored as `k mod 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_quarter_turns(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Self {
        Phase::from_quarter_turns(-(self.0 as i64))
    }
}

impl Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Phased tensor product of single-qubit Pauli operators on `n` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u32,
    z: u32,
    phase: Phase,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "qubit count must be at least 1".into(),
        ));
    }
    check_capacity(n)
}

impl PauliString {
    pub fn new(n: usize, x_mask: u32, z_mask: u32, phase: Phase) -> Result<Self> {
        check_qubits(n)?;
        let full = (1u32 << n) - 1;
        if x_mask & !full != 0 || z_mask & !full != 0 {
            return Err(Error::InvalidArgument(format!(
                "masks {x_mask:#b}/{z_mask:#b} do not fit in {n} qubits"
            )));
        }
        Ok(PauliString {
            n,
            x: x_mask,
            z: z_mask,
            phase,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, 0, 0, Phase::ONE)
    }

    /// Single operator `p` on 0-based `site`.
    pub fn single(n: usize, site: usize, p: Pauli) -> Result<Self> {
        Self::from_sites(n, &[(site, p)])
    }

    /// Builds a string from `(site, operator)` pairs; sites are 0-based and
    /// must be distinct.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        check_qubits(n)?;
        let (mut x, mut z) = (0u32, 0u32);
        let mut seen = 0u32;
        for &(site, p) in sites {
            if site >= n {
                return Err(Error::InvalidArgument(format!(
                    "site {site} out of range for {n} qubits"
                )));
            }
            if seen & (1 << site) != 0 {
                return Err(Error::InvalidArgument(format!("site {site} given twice")));
            }
            seen |= 1 << site;
            let (bx, bz) = p.bits();
            x |= (bx as u32) << site;
            z |= (bz as u32) << site;
        }
        Self::new(n, x, z, Phase::ONE)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u32 {
        self.x
    }

    pub fn z_mask(&self) -> u32 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(self, phase: Phase) -> Self {
        PauliString { phase, ..self }
    }

    pub fn site(&self, j: usize) -> Pauli {
        Pauli::from_bits(self.x >> j & 1 == 1, self.z >> j & 1 == 1)
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Operator word with site 1 leftmost, phase not included.
    pub fn word(&self) -> String {
        (0..self.n).map(|j| self.site(j).to_char()).collect()
    }

    /// Group product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        // (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^{|z1 ∧ x2|} X^{x1^x2} Z^{z1^z2}
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let turns = self.phase.0 as i64
            + other.phase.0 as i64
            + (self.x & self.z).count_ones() as i64
            + (other.x & other.z).count_ones() as i64
            + 2 * (self.z & other.x).count_ones() as i64
            - (x & z).count_ones() as i64;
        Ok(PauliString {
            n: self.n,
            x,
            z,
            phase: Phase::from_quarter_turns(turns),
        })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action on the basis state `|b⟩`: returns `(b', c)` with `P|b⟩ = c|b'⟩`.
    pub fn apply(&self, b: usize) -> (usize, C64) {
        debug_assert!(b < 1usize << self.n);
        let b32 = b as u32;
        let turns = self.phase.0 as i64
            + (self.x & self.z).count_ones() as i64
            + 2 * (self.z & b32).count_ones() as i64;
        (
            (b32 ^ self.x) as usize,
            Phase::from_quarter_turns(turns).to_complex(),
        )
    }

    /// Dense `2^n × 2^n` matrix of the string.
    pub fn to_dense(&self) -> DenseMatrix {
        let dim = 1usize << self.n;
        let mut m = Mat::<C64>::zeros(dim, dim);
        for b in 0..dim {
            let (r, c) = self.apply(b);
            m[(r, b)] = c;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.word())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional phase prefix (`+`, `-`, `+i`, `-i`, `i`) followed by
    /// a word over `{I, X, Y, Z}`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, word) = if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        let sites = word
            .chars()
            .enumerate()
            .map(|(j, c)| {
                Pauli::from_char(c)
                    .map(|p| (j, p))
                    .ok_or_else(|| Error::Parse(format!("invalid Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_sites(sites.len(), &sites)?.with_phase(phase))
    }
}

/// Complex-weighted sum of Pauli strings in canonical form.
///
/// Stored strings all carry phase `+1`, are sorted by `(x_mask, z_mask)` and
/// appear at most once; coefficients that cancel to exactly zero are removed.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSum {
    n: usize,
    terms: Vec<(C64, PauliString)>,
}

impl OperatorSum {
    /// Empty (zero) operator on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(OperatorSum {
            n,
            terms: Vec::new(),
        })
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C64, PauliString)>,
    {
        let mut sum = Self::new(n)?;
        for (c, p) in terms {
            sum.add_term(c, p)?;
        }
        Ok(sum)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · string`, folding the string's phase into the coefficient.
    pub fn add_term(&mut self, coeff: C64, string: PauliString) -> Result<()> {
        if string.n != self.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: string.n,
            });
        }
        let coeff = coeff * string.phase.to_complex();
        let string = string.with_phase(Phase::ONE);
        let key = (string.x, string.z);
        match self.terms.binary_search_by_key(&key, |(_, p)| (p.x, p.z)) {
            Ok(pos) => {
                self.terms[pos].0 += coeff;
                if self.terms[pos].0 == ZERO {
                    self.terms.remove(pos);
                }
            }
            Err(pos) => {
                if coeff != ZERO {
                    self.terms.insert(pos, (coeff, string));
                }
            }
        }
        Ok(())
    }

    /// Coefficient of the phase-`+1` string with the given masks.
    pub fn coefficient(&self, x_mask: u32, z_mask: u32) -> C64 {
        self.terms
            .binary_search_by_key(&(x_mask, z_mask), |(_, p)| (p.x, p.z))
            .map(|pos| self.terms[pos].0)
            .unwrap_or(ZERO)
    }

    pub fn scaled(&self, s: C64) -> OperatorSum {
        let terms = if s == ZERO {
            Vec::new()
        } else {
            self.terms.iter().map(|&(c, p)| (c * s, p)).collect()
        };
        OperatorSum { n: self.n, terms }
    }

    pub fn plus(&self, other: &OperatorSum) -> Result<OperatorSum> {
        let mut out = self.clone();
        for &(c, p) in &other.terms {
            out.add_term(c, p)?;
        }
        Ok(out)
    }

    /// True iff every coefficient is real, which for phase-`+1` strings is
    /// equivalent to the operator being Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.terms
            .iter()
            .all(|(c, _)| c.im.abs() <= HERMITIAN_COEFF_TOL)
    }

    /// Sparse matrix-vector product `Σ c_P P |ψ⟩`.
    pub fn apply(&self, amps: &[C64]) -> Result<Vec<C64>> {
        let dim = 1usize << self.n;
        if amps.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "state has {} amplitudes, operator acts on {dim}",
                amps.len()
            )));
        }
        let mut out = vec![ZERO; dim];
        for &(c, p) in &self.terms {
            for (b, &a) in amps.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let (r, ph) = p.apply(b);
                out[r] += c * ph * a;
            }
        }
        Ok(out)
    }

    /// Dense matrix `Σ c_P P`, assembled column by column (one entry per
    /// column per term).
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        check_capacity(self.n)?;
        let dim = 1usize << self.n;
        let mut m = Mat::<C64>::zeros(dim, dim);
        for &(c, p) in &self.terms {
            for b in 0..dim {
                let (r, ph) = p.apply(b);
                m[(r, b)] += c * ph;
            }
        }
        Ok(m)
    }
}

impl fmt::Display for OperatorSum {
    /// One term per line: `coeff_re coeff_im word`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, p) in &self.terms {
            writeln!(f, "{:.16e} {:.16e} {}", c.re, c.im, p.word())?;
        }
        Ok(())
    }
}

impl FromStr for OperatorSum {
    type Err = Error;

    /// Parses the line format written by `Display`. Blank lines and lines
    /// starting with `#` are skipped. The qubit count comes from the word
    /// length, so at least one term is required.
    fn from_str(s: &str) -> Result<Self> {
        let mut parsed = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected `re im word`, got {line:?}",
                    lineno + 1
                )));
            }
            let num = |t: &str| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {t:?}: {e}", lineno + 1)))
            };
            let c = C64::new(num(fields[0])?, num(fields[1])?);
            let p: PauliString = fields[2].parse()?;
            parsed.push((c, p));
        }
        let n = parsed
            .first()
            .map(|(_, p)| p.n)
            .ok_or_else(|| Error::Parse("operator sum has no terms".into()))?;
        OperatorSum::from_terms(n, parsed)
    }
}

/// In-place Walsh-Hadamard transform: `v[z] <- Σ_b (-1)^{|z ∧ b|} v[b]`.
fn walsh_hadamard(v: &mut [C64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Expands a `2^n × 2^n` matrix over all `4^n` Pauli strings,
/// `m = Σ_P Tr(P† m)/2^n · P`, dropping coefficients below [`DEFAULT_DROP_TOL`].
pub fn pauli_decompose(m: MatRef<'_, C64>, n: usize) -> Result<OperatorSum> {
    pauli_decompose_with_tol(m, n, DEFAULT_DROP_TOL)
}

/// [`pauli_decompose`] with an explicit drop tolerance.
///
/// For each x-mask the traces against all z-masks are one Walsh-Hadamard
/// transform of the diagonal `b -> m[b ^ x, b]`, so the cost is
/// `O(4^n · n)` rather than `O(8^n)`.
pub fn pauli_decompose_with_tol(
    m: MatRef<'_, C64>,
    n: usize,
    drop_tol: f64,
) -> Result<OperatorSum> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let dim_n = qubits_for_dim(m.nrows())?;
    if dim_n != n {
        return Err(Error::InvalidArgument(format!(
            "matrix dimension {} does not match {n} qubits",
            m.nrows()
        )));
    }
    check_qubits(n)?;
    debug_assert!(n <= MAX_DENSE_QUBITS);

    let dim = 1usize << n;
    let norm = 1.0 / dim as f64;
    let mut out = OperatorSum::new(n)?;
    let mut v = vec![ZERO; dim];
    for x in 0..dim {
        for (b, slot) in v.iter_mut().enumerate() {
            *slot = m[(b ^ x, b)];
        }
        walsh_hadamard(&mut v);
        for (z, &tr) in v.iter().enumerate() {
            // phase-+1 string = i^{|x∧z|} X^x Z^z, so Tr(P† m) picks up (-i)^{|x∧z|}
            let turns = -(((x & z) as u32).count_ones() as i64);
            let c = Phase::from_quarter_turns(turns).to_complex() * tr * norm;
            if c.norm() >= drop_tol {
                out.add_term(c, PauliString::new(n, x as u32, z as u32, Phase::ONE)?)?;
            }
        }
    }
    Ok(out)
}
