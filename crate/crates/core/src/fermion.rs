//! Second-quantized operators, the Jordan-Wigner map onto Pauli strings, and
//! unitary coupled-cluster state preparation.
//!
//! Modes are 1-based. Mode `j` of `N` maps to qubit `j - 1` with
//!
//! ```text
//! a_j  -> I^(j-1) ⊗ σ+ ⊗ Z^(N-j),   σ+ = (X + iY)/2 = |0><1|
//! a_j† -> I^(j-1) ⊗ σ- ⊗ Z^(N-j),   σ- = (X - iY)/2 = |1><0|
//! ```
//!
//! so `|1>` is an occupied mode and `a_j† a_j -> (I - Z_j)/2`.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliHamiltonian, PauliString};
use crate::statevector::{StatePreparation, StateVector};
use crate::vqe::{run_vqe, VqeResult, VqeSettings};

/// Largest mode count accepted by [`jordan_wigner`].
pub const MAX_JW_MODES: usize = 12;
/// Largest mode count for dense UCC exponentiation.
pub const MAX_UCC_MODES: usize = 10;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
const C_I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LadderOp {
    /// 1-based mode index.
    pub mode: usize,
    /// Creation operator when set.
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionTerm {
    pub coefficient: Complex64,
    /// Operators in product order, leftmost first.
    pub ops: Vec<LadderOp>,
}

/// Sum of products of creation and annihilation operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionOperator {
    pub n_modes: usize,
    pub terms: Vec<FermionTerm>,
}

impl FermionOperator {
    pub fn new(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: Vec::new(),
        }
    }

    pub fn add_term(&mut self, coefficient: Complex64, ops: Vec<LadderOp>) -> Result<()> {
        for op in &ops {
            if op.mode == 0 || op.mode > self.n_modes {
                return Err(Error::ModeOutOfRange {
                    index: op.mode,
                    n_modes: self.n_modes,
                });
            }
        }
        self.terms.push(FermionTerm { coefficient, ops });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Hermitian conjugate: reversed operator order, flipped daggers, conjugated coefficients.
    pub fn adjoint(&self) -> Self {
        Self {
            n_modes: self.n_modes,
            terms: self
                .terms
                .iter()
                .map(|t| FermionTerm {
                    coefficient: t.coefficient.conj(),
                    ops: t
                        .ops
                        .iter()
                        .rev()
                        .map(|op| LadderOp {
                            mode: op.mode,
                            dagger: !op.dagger,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// `self - other`, as concatenated term lists.
    pub fn minus(&self, other: &FermionOperator) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::QubitMismatch {
                expected: self.n_modes,
                found: other.n_modes,
            });
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().map(|t| FermionTerm {
            coefficient: -t.coefficient,
            ops: t.ops.clone(),
        }));
        Ok(out)
    }
}

/// Complex-weighted Pauli sum, the general image of the Jordan-Wigner map.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitOperator {
    pub n_qubits: usize,
    pub terms: IndexMap<PauliString, Complex64>,
}

impl QubitOperator {
    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or(C_ZERO)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, c) in &self.terms {
            let masks = p.masks();
            for j in 0..dim {
                let (k, phase) = masks.act(j);
                m[(k, j)] += phase * c;
            }
        }
        m
    }

    /// Largest imaginary coefficient part; zero for a Hermitian operator.
    pub fn hermitian_residue(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    /// Largest real coefficient part; zero for an anti-Hermitian operator.
    pub fn anti_hermitian_residue(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.re.abs()))
    }

    /// Converts to a real Pauli Hamiltonian when every imaginary part is below 1e-10.
    pub fn to_hamiltonian(&self) -> Result<PauliHamiltonian> {
        let residue = self.hermitian_residue();
        if residue > 1e-10 {
            return Err(Error::ImaginaryResidue(residue));
        }
        PauliHamiltonian::from_terms(
            self.n_qubits,
            self.terms.iter().map(|(p, c)| (c.re, p.clone())),
        )
    }
}

fn ladder_image(op: LadderOp, n: usize) -> [(Complex64, PauliString); 2] {
    let q = op.mode - 1;
    let with = |p: Pauli| {
        let mut f = vec![Pauli::I; n];
        f[q] = p;
        for item in f.iter_mut().skip(q + 1) {
            *item = Pauli::Z;
        }
        PauliString::new(f).expect("n >= 1")
    };
    let y = if op.dagger { -0.5 * C_I } else { 0.5 * C_I };
    [(0.5 * C_ONE, with(Pauli::X)), (y, with(Pauli::Y))]
}

/// Maps a fermionic operator onto qubits, expanding every product into
/// Pauli strings and merging equal strings.
pub fn jordan_wigner(f: &FermionOperator) -> Result<QubitOperator> {
    let n = f.n_modes;
    if n == 0 {
        return Err(Error::Config("operator needs at least one mode".into()));
    }
    if n > MAX_JW_MODES {
        return Err(Error::SizeLimit {
            what: "modes",
            value: n,
            limit: MAX_JW_MODES,
        });
    }
    let mut out: IndexMap<PauliString, Complex64> = IndexMap::new();
    for term in &f.terms {
        let mut acc: IndexMap<PauliString, Complex64> = IndexMap::new();
        acc.insert(PauliString::identity(n), term.coefficient);
        for &op in &term.ops {
            if op.mode == 0 || op.mode > n {
                return Err(Error::ModeOutOfRange {
                    index: op.mode,
                    n_modes: n,
                });
            }
            let image = ladder_image(op, n);
            let mut next: IndexMap<PauliString, Complex64> = IndexMap::new();
            for (s, c) in &acc {
                for (w, p) in &image {
                    let (phase, r) = s.multiply(p)?;
                    *next.entry(r).or_insert(C_ZERO) += c * w * phase.to_complex();
                }
            }
            acc = next;
        }
        for (p, c) in acc {
            *out.entry(p).or_insert(C_ZERO) += c;
        }
    }
    out.retain(|_, c| c.norm() > 1e-14);
    Ok(QubitOperator { n_qubits: n, terms: out })
}

/// One- and two-body coefficients with explicit 1-based index tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MolecularIntegrals {
    pub n_modes: usize,
    #[serde(default)]
    pub one_body: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub two_body: Vec<(usize, usize, usize, usize, f64)>,
}

impl MolecularIntegrals {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::Config("n_modes must be at least 1".into()));
        }
        let check = |i: usize| {
            if i == 0 || i > self.n_modes {
                Err(Error::ModeOutOfRange {
                    index: i,
                    n_modes: self.n_modes,
                })
            } else {
                Ok(())
            }
        };
        for &(p, q, v) in &self.one_body {
            check(p)?;
            check(q)?;
            if !v.is_finite() {
                return Err(Error::Config(format!("non-finite h[{p},{q}]")));
            }
        }
        for &(p, q, r, s, v) in &self.two_body {
            for i in [p, q, r, s] {
                check(i)?;
            }
            if !v.is_finite() {
                return Err(Error::Config(format!("non-finite h[{p},{q},{r},{s}]")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::Json {
            path: source.to_string(),
            source: e,
        })?;
        m.validate()?;
        Ok(m)
    }
}

/// `sum h_pq a_p† a_q + sum h_pqrs a_p† a_q† a_r a_s`, one term per nonzero entry.
pub fn build_molecular_hamiltonian(m: &MolecularIntegrals) -> Result<FermionOperator> {
    m.validate()?;
    let mut f = FermionOperator::new(m.n_modes);
    for &(p, q, v) in &m.one_body {
        if v != 0.0 {
            f.add_term(v.into(), vec![LadderOp::create(p), LadderOp::annihilate(q)])?;
        }
    }
    for &(p, q, r, s, v) in &m.two_body {
        if v != 0.0 {
            f.add_term(
                v.into(),
                vec![
                    LadderOp::create(p),
                    LadderOp::create(q),
                    LadderOp::annihilate(r),
                    LadderOp::annihilate(s),
                ],
            )?;
        }
    }
    Ok(f)
}

/// Cluster amplitudes `t_p^r` (creation index `p`, annihilation index `r`)
/// and `t_pq^rs`, truncated at excitation level `max_excitation`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClusterAmplitudes {
    pub n_modes: usize,
    pub max_excitation: u8,
    pub singles: BTreeMap<(usize, usize), f64>,
    pub doubles: BTreeMap<(usize, usize, usize, usize), f64>,
}

impl ClusterAmplitudes {
    pub fn new(n_modes: usize, max_excitation: u8) -> Result<Self> {
        if !(1..=2).contains(&max_excitation) {
            return Err(Error::Config(format!(
                "excitation level {max_excitation} unsupported (1 or 2)"
            )));
        }
        Ok(Self {
            n_modes,
            max_excitation,
            ..Default::default()
        })
    }
}

/// `T = T_1 (+ T_2)` with `T_1 = sum t_p^r a_p† a_r`, `T_2 = sum t_pq^rs a_p† a_q† a_r a_s`.
pub fn build_cluster(amps: &ClusterAmplitudes) -> Result<FermionOperator> {
    if !(1..=2).contains(&amps.max_excitation) {
        return Err(Error::Config(format!(
            "excitation level {} unsupported (1 or 2)",
            amps.max_excitation
        )));
    }
    let mut t = FermionOperator::new(amps.n_modes);
    for (&(p, r), &v) in &amps.singles {
        if !v.is_finite() {
            return Err(Error::Config(format!("non-finite amplitude t[{p},{r}]")));
        }
        t.add_term(v.into(), vec![LadderOp::create(p), LadderOp::annihilate(r)])?;
    }
    if amps.max_excitation >= 2 {
        for (&(p, q, r, s), &v) in &amps.doubles {
            if !v.is_finite() {
                return Err(Error::Config(format!("non-finite amplitude t[{p},{q},{r},{s}]")));
            }
            t.add_term(
                v.into(),
                vec![
                    LadderOp::create(p),
                    LadderOp::create(q),
                    LadderOp::annihilate(r),
                    LadderOp::annihilate(s),
                ],
            )?;
        }
    }
    Ok(t)
}

/// Parses an occupation bitstring (mode 1 first, `1` = occupied) into a basis index.
pub fn reference_index(reference: &str, n_modes: usize) -> Result<usize> {
    if reference.len() != n_modes || !reference.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::Config(format!(
            "reference {reference:?} must be a {n_modes}-character string of 0/1"
        )));
    }
    Ok(usize::from_str_radix(reference, 2).expect("validated binary"))
}

/// `exp(A)` for anti-Hermitian `A`, via the eigendecomposition of the
/// Hermitian matrix `iA`. Rejects inputs with `||A + A†||_max > 1e-10`.
pub fn expm_anti_hermitian(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let dev = (a + a.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if dev > 1e-10 {
        return Err(Error::NotAntiHermitian(dev));
    }
    let herm = a * C_I;
    let herm = (&herm + herm.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(herm);
    // A = -i H, so exp(A) = V diag(exp(-i lambda)) V†.
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l));
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&phases) * v.adjoint())
}

/// `exp(T - T†) |reference>` by exact dense exponentiation.
pub fn ucc_prepare(amps: &ClusterAmplitudes, reference: &str) -> Result<StateVector> {
    let n = amps.n_modes;
    if n > MAX_UCC_MODES {
        return Err(Error::SizeLimit {
            what: "modes for UCC",
            value: n,
            limit: MAX_UCC_MODES,
        });
    }
    let idx = reference_index(reference, n)?;
    let t = build_cluster(amps)?;
    let generator = jordan_wigner(&t.minus(&t.adjoint())?)?;
    let residue = generator.anti_hermitian_residue();
    if residue > 1e-10 {
        return Err(Error::NotAntiHermitian(residue));
    }
    let u = expm_anti_hermitian(&generator.to_dense())?;
    let reference = StateVector::basis_state(n, idx)?;
    Ok(reference.apply_matrix_unchecked(&u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Excitation {
    Single { p: usize, r: usize },
    Double { p: usize, q: usize, r: usize, s: usize },
}

/// UCC ansatz over a fixed excitation list; parameter `k` is the amplitude
/// of excitation `k`.
///
/// The Jordan-Wigner images of the generators `E_k - E_k†` are precomputed
/// so that each preparation is one dense exponential.
#[derive(Debug, Clone)]
pub struct UccAnsatz {
    n_modes: usize,
    reference: String,
    reference_index: usize,
    excitations: Vec<Excitation>,
    generators: Vec<DMatrix<Complex64>>,
}

impl UccAnsatz {
    pub fn new(n_modes: usize, reference: &str, excitations: Vec<Excitation>) -> Result<Self> {
        if n_modes > MAX_UCC_MODES {
            return Err(Error::SizeLimit {
                what: "modes for UCC",
                value: n_modes,
                limit: MAX_UCC_MODES,
            });
        }
        let reference_index = reference_index(reference, n_modes)?;
        let mut generators = Vec::with_capacity(excitations.len());
        for &ex in &excitations {
            let mut amps = ClusterAmplitudes::new(n_modes, 2)?;
            match ex {
                Excitation::Single { p, r } => {
                    amps.singles.insert((p, r), 1.0);
                }
                Excitation::Double { p, q, r, s } => {
                    amps.doubles.insert((p, q, r, s), 1.0);
                }
            }
            let t = build_cluster(&amps)?;
            generators.push(jordan_wigner(&t.minus(&t.adjoint())?)?.to_dense());
        }
        Ok(Self {
            n_modes,
            reference: reference.to_string(),
            reference_index,
            excitations,
            generators,
        })
    }

    /// Particle-conserving excitations out of the reference: singles
    /// `virtual <- occupied`, and for level 2 also doubles with `p < q`
    /// virtual and `r < s` occupied.
    pub fn from_reference(n_modes: usize, reference: &str, max_excitation: u8) -> Result<Self> {
        if !(1..=2).contains(&max_excitation) {
            return Err(Error::Config(format!(
                "excitation level {max_excitation} unsupported (1 or 2)"
            )));
        }
        reference_index(reference, n_modes)?;
        let occupied: Vec<usize> = reference
            .chars()
            .enumerate()
            .filter(|(_, c)| *c == '1')
            .map(|(i, _)| i + 1)
            .collect();
        let virtuals: Vec<usize> = reference
            .chars()
            .enumerate()
            .filter(|(_, c)| *c == '0')
            .map(|(i, _)| i + 1)
            .collect();
        let mut ex = Vec::new();
        for &p in &virtuals {
            for &r in &occupied {
                ex.push(Excitation::Single { p, r });
            }
        }
        if max_excitation >= 2 {
            for (i, &p) in virtuals.iter().enumerate() {
                for &q in &virtuals[i + 1..] {
                    for (k, &r) in occupied.iter().enumerate() {
                        for &s in &occupied[k + 1..] {
                            ex.push(Excitation::Double { p, q, r, s });
                        }
                    }
                }
            }
        }
        Self::new(n_modes, reference, ex)
    }

    pub fn excitations(&self) -> &[Excitation] {
        &self.excitations
    }

    pub fn reference(&self) -> &str {
        &self.reference
    }

    pub fn reference_state(&self) -> StateVector {
        StateVector::basis_state(self.n_modes, self.reference_index).expect("validated reference")
    }

    /// Amplitude table corresponding to a parameter vector.
    pub fn amplitudes(&self, params: &[f64]) -> Result<ClusterAmplitudes> {
        if params.len() != self.excitations.len() {
            return Err(Error::LengthMismatch {
                expected: self.excitations.len(),
                found: params.len(),
            });
        }
        let mut amps = ClusterAmplitudes::new(self.n_modes, 2)?;
        for (&ex, &t) in self.excitations.iter().zip(params) {
            match ex {
                Excitation::Single { p, r } => {
                    *amps.singles.entry((p, r)).or_insert(0.0) += t;
                }
                Excitation::Double { p, q, r, s } => {
                    *amps.doubles.entry((p, q, r, s)).or_insert(0.0) += t;
                }
            }
        }
        Ok(amps)
    }
}

impl StatePreparation for UccAnsatz {
    fn n_qubits(&self) -> usize {
        self.n_modes
    }

    fn parameter_count(&self) -> usize {
        self.excitations.len()
    }

    fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        if params.len() != self.excitations.len() {
            return Err(Error::LengthMismatch {
                expected: self.excitations.len(),
                found: params.len(),
            });
        }
        let dim = 1usize << self.n_modes;
        let mut a = DMatrix::<Complex64>::zeros(dim, dim);
        for (g, &t) in self.generators.iter().zip(params) {
            if t != 0.0 {
                a += g * Complex64::from(t);
            }
        }
        let u = expm_anti_hermitian(&a)?;
        Ok(self.reference_state().apply_matrix_unchecked(&u))
    }
}

/// Variational minimization over UCC amplitudes. Starts from all-zero
/// amplitudes (the reference state) unless `settings.initial` is given.
pub fn ucc_vqe(h: &PauliHamiltonian, ansatz: &UccAnsatz, settings: &VqeSettings) -> Result<VqeResult> {
    let mut settings = settings.clone();
    if settings.initial.is_none() {
        settings.initial = Some(vec![0.0; ansatz.parameter_count()]);
    }
    run_vqe(h, ansatz, &settings)
}
