//! Pauli-string algebra and Hamiltonians written as real-weighted Pauli sums.
//!
//! Qubit 0 is the leftmost Kronecker factor of a string, so in a basis index
//! it occupies the most significant bit: for `n` qubits, qubit `q` lives at
//! bit `n - 1 - q`.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register for which a full 4^n Pauli-basis decomposition is attempted.
pub const MAX_DECOMPOSE_QUBITS: usize = 8;

/// Coefficients with smaller magnitude are dropped by [`decompose`] unless overridden.
pub const DEFAULT_PRUNE: f64 = 1e-12;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
const C_I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// The 2x2 matrix of this operator in the computational basis.
    pub fn matrix(self) -> DMatrix<Complex64> {
        let (a, b, c, d) = match self {
            Pauli::I => (C_ONE, C_ZERO, C_ZERO, C_ONE),
            Pauli::X => (C_ZERO, C_ONE, C_ONE, C_ZERO),
            Pauli::Y => (C_ZERO, -C_I, C_I, C_ZERO),
            Pauli::Z => (C_ONE, C_ZERO, C_ZERO, -C_ONE),
        };
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    /// Single-qubit product `self * other = phase * result`.
    pub fn mul(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MINUS_I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MINUS_I, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }
}

/// A phase from {+1, +i, -1, -i}, stored as a power of i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn power_of_i(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => C_ONE,
            1 => C_I,
            2 => -C_ONE,
            _ => -C_I,
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Tensor product of single-qubit Pauli operators; factor 0 is qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    factors: Vec<Pauli>,
}

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyLabel);
        }
        Ok(Self { factors })
    }

    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "a Pauli string acts on at least one qubit");
        Self {
            factors: vec![Pauli::I; n_qubits],
        }
    }

    /// String with `pauli` on qubit `qubit` and identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.factors[qubit] = pauli;
        s
    }

    pub fn parse(label: &str) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        let factors = label
            .chars()
            .enumerate()
            .map(|(position, c)| {
                Pauli::from_symbol(c).ok_or_else(|| Error::PauliParse {
                    label: label.to_string(),
                    position,
                    found: c,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors })
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.factors.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Bit masks describing the action on basis states.
    ///
    /// `P|j> = i^y_count * (-1)^popcount(j & z_mask) |j ^ x_mask>`.
    pub fn masks(&self) -> PauliMasks {
        let n = self.factors.len();
        let mut m = PauliMasks {
            x_mask: 0,
            z_mask: 0,
            y_count: 0,
        };
        for (q, &p) in self.factors.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => m.x_mask |= bit,
                Pauli::Y => {
                    m.x_mask |= bit;
                    m.z_mask |= bit;
                    m.y_count += 1;
                }
                Pauli::Z => m.z_mask |= bit,
            }
        }
        m
    }

    /// Product `self * other = phase * result`, composed factor-wise.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits(),
                found: other.n_qubits(),
            });
        }
        let mut phase = Phase::ONE;
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase = phase * ph;
                p
            })
            .collect();
        Ok((phase, PauliString { factors }))
    }

    /// Dense matrix as the Kronecker product of the factors in order.
    pub fn matrix(&self) -> DenseHermitian {
        let mut m = self.factors[0].matrix();
        for p in &self.factors[1..] {
            m = m.kronecker(&p.matrix());
        }
        DenseHermitian { matrix: m }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.factors {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub x_mask: usize,
    pub z_mask: usize,
    pub y_count: u32,
}

impl PauliMasks {
    /// Image of basis state `j`: returns `(k, phase)` with `P|j> = phase |k>`.
    #[inline]
    pub fn act(&self, j: usize) -> (usize, Complex64) {
        let sign = if (j & self.z_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let base = Phase((self.y_count % 4) as u8).to_complex();
        (j ^ self.x_mask, base * sign)
    }
}

/// A dense Hermitian matrix whose dimension is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    matrix: DMatrix<Complex64>,
}

impl DenseHermitian {
    /// Validates squareness, power-of-two dimension of at least 2 and
    /// conjugate symmetry (relative tolerance 1e-12 of the largest entry).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: matrix.ncols(),
            });
        }
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let mut dev = 0.0_f64;
        for i in 0..dim {
            for j in i..dim {
                dev = dev.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if dev > 1e-12 * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { matrix })
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }
}

/// Real-weighted sum of Pauli strings on a fixed register.
///
/// Duplicate strings are merged by adding coefficients; insertion order of
/// first occurrence is preserved so iteration is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: IndexMap<PauliString, f64>,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1);
        Self {
            n_qubits,
            terms: IndexMap::new(),
        }
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut h = Self::new(n_qubits);
        for (c, p) in terms {
            h.add_term(c, p)?;
        }
        Ok(h)
    }

    /// Convenience constructor from `(coefficient, label)` pairs.
    pub fn from_labels(terms: &[(f64, &str)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Config("no terms".into()))?;
        let n = first.1.len();
        Self::from_terms(
            n,
            terms
                .iter()
                .map(|&(c, l)| PauliString::parse(l).map(|p| (c, p)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn add_term(&mut self, coefficient: f64, string: PauliString) -> Result<()> {
        if string.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: string.n_qubits(),
            });
        }
        if !coefficient.is_finite() {
            return Err(Error::Config(format!(
                "non-finite coefficient {coefficient} for {string}"
            )));
        }
        *self.terms.entry(string).or_insert(0.0) += coefficient;
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &PauliString)> + '_ {
        self.terms.iter().map(|(p, &c)| (c, p))
    }

    /// Coefficient of `string`, zero when absent.
    pub fn coefficient(&self, string: &PauliString) -> f64 {
        self.terms.get(string).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, &c)| (p.clone(), c * factor)).collect(),
        }
    }

    /// Term-wise sum of two Hamiltonians on the same register.
    pub fn sum(&self, other: &PauliHamiltonian) -> Result<Self> {
        let mut out = self.clone();
        for (c, p) in other.terms() {
            out.add_term(c, p.clone())?;
        }
        Ok(out)
    }

    /// Drops terms whose coefficient magnitude is below `threshold`.
    pub fn pruned(&self, threshold: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() >= threshold)
                .map(|(p, &c)| (p.clone(), c))
                .collect(),
        }
    }

    /// Parses the line-oriented text format: `<coefficient> <label>` per line,
    /// `#` comments and blank lines ignored. `source` names the input in diagnostics.
    pub fn parse_text(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: source.to_string(),
            line,
            message,
        };
        let mut h: Option<PauliHamiltonian> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(coeff), Some(label), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(err(
                    line_no,
                    format!("expected `<coefficient> <label>`, got {line:?}"),
                ));
            };
            let c: f64 = coeff
                .parse()
                .map_err(|_| err(line_no, format!("invalid coefficient {coeff:?}")))?;
            if !c.is_finite() {
                return Err(err(line_no, format!("non-finite coefficient {coeff:?}")));
            }
            let p = PauliString::parse(label).map_err(|e| err(line_no, e.to_string()))?;
            let h = h.get_or_insert_with(|| PauliHamiltonian::new(p.n_qubits()));
            if p.n_qubits() != h.n_qubits() {
                return Err(err(
                    line_no,
                    format!(
                        "label {label:?} has {} qubits, expected {}",
                        p.n_qubits(),
                        h.n_qubits()
                    ),
                ));
            }
            h.add_term(c, p).map_err(|e| err(line_no, e.to_string()))?;
        }
        h.ok_or_else(|| Error::InvalidInput {
            path: source.to_string(),
            message: "no terms found".into(),
        })
    }

    /// Renders the text format accepted by [`PauliHamiltonian::parse_text`].
    pub fn to_text(&self) -> String {
        self.terms()
            .map(|(c, p)| format!("{c} {p}\n"))
            .collect()
    }
}

impl fmt::Display for PauliHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, p) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{p}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Decomposes a Hermitian matrix into the Pauli basis with the default prune threshold.
pub fn decompose(m: &DenseHermitian) -> Result<PauliHamiltonian> {
    decompose_with_threshold(m, DEFAULT_PRUNE)
}

/// Coefficient of each string is `Tr(P M) / 2^n`; terms with magnitude below
/// `prune` are dropped.
pub fn decompose_with_threshold(m: &DenseHermitian, prune: f64) -> Result<PauliHamiltonian> {
    let n = m.n_qubits();
    if n > MAX_DECOMPOSE_QUBITS {
        return Err(Error::SizeLimit {
            what: "qubits for Pauli decomposition",
            value: n,
            limit: MAX_DECOMPOSE_QUBITS,
        });
    }
    let dim = m.dim();
    let mat = m.matrix();
    let mut h = PauliHamiltonian::new(n);
    let basis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    for code in 0..(1usize << (2 * n)) {
        let factors = (0..n)
            .map(|q| basis[(code >> (2 * (n - 1 - q))) & 3])
            .collect();
        let p = PauliString { factors };
        let masks = p.masks();
        // P[j^x, j] = phase_j, so Tr(P M) = sum_j phase_j * M[j, j^x].
        let mut trace = C_ZERO;
        for j in 0..dim {
            let (k, phase) = masks.act(j);
            trace += phase * mat[(j, k)];
        }
        let c = trace / dim as f64;
        if c.im.abs() > 1e-8 {
            return Err(Error::ImaginaryResidue(c.im.abs()));
        }
        if c.re.abs() >= prune {
            h.terms.insert(p, c.re);
        }
    }
    Ok(h)
}

/// Dense matrix `sum_i h_i P_i`.
pub fn reconstruct(h: &PauliHamiltonian) -> DenseHermitian {
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, p) in h.terms() {
        let masks = p.masks();
        for j in 0..dim {
            let (k, phase) = masks.act(j);
            m[(k, j)] += phase * c;
        }
    }
    DenseHermitian { matrix: m }
}

/// Pauli expansion of `(H - lambda I)^2`.
///
/// Pairwise products are accumulated with their phases; anti-commuting pairs
/// cancel so the result is real.
pub fn shift_and_square(h: &PauliHamiltonian, lambda: f64) -> Result<PauliHamiltonian> {
    let n = h.n_qubits();
    let mut shifted = h.clone();
    if lambda != 0.0 {
        shifted.add_term(-lambda, PauliString::identity(n))?;
    }
    let terms: Vec<(f64, &PauliString)> = shifted.terms().collect();
    let mut acc: IndexMap<PauliString, Complex64> = IndexMap::new();
    let mut scale = 0.0_f64;
    for &(ci, pi) in &terms {
        for &(cj, pj) in &terms {
            let (phase, p) = pi.multiply(pj)?;
            let w = ci * cj;
            scale += w.abs();
            *acc.entry(p).or_insert(C_ZERO) += phase.to_complex() * w;
        }
    }
    let tol = 1e-10 * scale.max(1.0);
    let mut out = PauliHamiltonian::new(n);
    for (p, c) in acc {
        if c.im.abs() > tol {
            return Err(Error::ImaginaryResidue(c.im.abs()));
        }
        if c.re.abs() > DEFAULT_PRUNE * scale.max(1.0) {
            out.terms.insert(p, c.re);
        }
    }
    Ok(out)
}
