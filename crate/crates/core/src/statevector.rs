//! Pure-state register simulation and the layered hardware-style ansatz.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliHamiltonian, PauliString};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 2x2 complex matrix.
pub type Gate1 = [[Complex64; 2]; 2];

/// `Rz(theta) = exp(-i theta Z / 2)`.
pub fn rz(theta: f64) -> Gate1 {
    let h = 0.5 * theta;
    [
        [Complex64::from_polar(1.0, -h), C_ZERO],
        [C_ZERO, Complex64::from_polar(1.0, h)],
    ]
}

/// `Ry(theta) = exp(-i theta Y / 2)`.
pub fn ry(theta: f64) -> Gate1 {
    let (s, c) = (0.5 * theta).sin_cos();
    [
        [Complex64::from(c), Complex64::from(-s)],
        [Complex64::from(s), Complex64::from(c)],
    ]
}

pub fn hadamard() -> Gate1 {
    let r = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    [[r, r], [r, -r]]
}

/// n-qubit pure state; amplitude index bit `n - 1 - q` belongs to qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("register needs at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::SizeLimit {
            what: "qubits",
            value: n,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

impl StateVector {
    /// The all-zeros computational basis state.
    pub fn init_zero(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![C_ZERO; dim];
        amplitudes[index] = C_ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the vector must have power-of-two length and unit norm within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("state norm {norm} differs from 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Config("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_dim(other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Componentwise complex conjugate in the computational basis.
    pub fn conjugate(&self) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }

    fn check_string(&self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        Ok(())
    }

    pub(crate) fn apply_gate_in_place(&mut self, qubit: usize, g: &Gate1) {
        let bit = 1usize << (self.n_qubits - 1 - qubit);
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = g[0][0] * a0 + g[0][1] * a1;
                self.amplitudes[i | bit] = g[1][0] * a0 + g[1][1] * a1;
            }
        }
    }

    pub(crate) fn apply_cnot_in_place(&mut self, control: usize, target: usize) {
        let cbit = 1usize << (self.n_qubits - 1 - control);
        let tbit = 1usize << (self.n_qubits - 1 - target);
        for i in 0..self.amplitudes.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amplitudes.swap(i, i | tbit);
            }
        }
    }

    /// Returns the state with a single-qubit gate applied.
    pub fn with_gate(mut self, qubit: usize, g: &Gate1) -> Result<Self> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: qubit + 1,
            });
        }
        self.apply_gate_in_place(qubit, g);
        Ok(self)
    }

    /// Returns the state with a CNOT applied.
    pub fn with_cnot(mut self, control: usize, target: usize) -> Result<Self> {
        let n = self.n_qubits;
        if control >= n || target >= n || control == target {
            return Err(Error::Config(format!(
                "invalid CNOT({control}, {target}) on {n} qubits"
            )));
        }
        self.apply_cnot_in_place(control, target);
        Ok(self)
    }

    /// `P|psi>`.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector> {
        self.check_string(p)?;
        let masks = p.masks();
        let mut out = vec![C_ZERO; self.dim()];
        for (j, a) in self.amplitudes.iter().enumerate() {
            let (k, phase) = masks.act(j);
            out[k] += phase * a;
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// `<psi|P|psi>`.
    pub fn exact_expectation(&self, p: &PauliString) -> Result<f64> {
        self.check_string(p)?;
        Ok(pauli_expectation(&self.amplitudes, p))
    }

    /// `sum_i h_i <psi|P_i|psi>`.
    pub fn exact_energy(&self, h: &PauliHamiltonian) -> Result<f64> {
        if h.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: h.n_qubits(),
            });
        }
        Ok(h
            .terms()
            .map(|(c, p)| c * pauli_expectation(&self.amplitudes, p))
            .sum())
    }

    /// Applies a dense unitary, rejecting matrices whose `U^dagger U` deviates
    /// from identity by more than 1e-8 in any entry.
    pub fn apply_unitary(&self, u: &DMatrix<Complex64>) -> Result<StateVector> {
        self.check_dim(u.nrows())?;
        self.check_dim(u.ncols())?;
        let gram = u.adjoint() * u;
        let dev = (gram - DMatrix::<Complex64>::identity(self.dim(), self.dim()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        if dev > 1e-8 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(self.apply_matrix_unchecked(u))
    }

    pub(crate) fn apply_matrix_unchecked(&self, u: &DMatrix<Complex64>) -> StateVector {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        let out = u * v;
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes: out.as_slice().to_vec(),
        }
    }
}

pub(crate) fn pauli_expectation(amps: &[Complex64], p: &PauliString) -> f64 {
    let masks = p.masks();
    let mut acc = C_ZERO;
    for (j, a) in amps.iter().enumerate() {
        let (k, phase) = masks.act(j);
        acc += amps[k].conj() * phase * a;
    }
    acc.re
}

/// Experimental parameters of a preparation circuit, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A parameterized map from real parameters to prepared states.
pub trait StatePreparation: Sync {
    fn n_qubits(&self) -> usize;

    fn parameter_count(&self) -> usize;

    fn prepare(&self, params: &[f64]) -> Result<StateVector>;
}

/// Layered ansatz: every layer applies `Rz Ry Rz` on each qubit (in that
/// circuit order) followed by a CNOT ladder `i -> i+1`; a final rotation
/// layer closes the circuit.
///
/// Parameters are consumed in circuit order, three per qubit per rotation
/// layer, so there are `3 * n_qubits * (layers + 1)` of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub layers: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, layers: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        if layers == 0 {
            return Err(Error::Config("ansatz needs at least one layer".into()));
        }
        Ok(Self { n_qubits, layers })
    }

    pub fn parameter_count(&self) -> usize {
        3 * self.n_qubits * (self.layers + 1)
    }

    fn rotation_layer(&self, state: &mut StateVector, params: &[f64]) {
        for (q, angles) in params.chunks_exact(3).enumerate() {
            state.apply_gate_in_place(q, &rz(angles[0]));
            state.apply_gate_in_place(q, &ry(angles[1]));
            state.apply_gate_in_place(q, &rz(angles[2]));
        }
    }
}

impl StatePreparation for AnsatzSpec {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn parameter_count(&self) -> usize {
        AnsatzSpec::parameter_count(self)
    }

    fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        if params.len() != self.parameter_count() {
            return Err(Error::LengthMismatch {
                expected: self.parameter_count(),
                found: params.len(),
            });
        }
        let mut state = StateVector::init_zero(self.n_qubits)?;
        let per_layer = 3 * self.n_qubits;
        for layer in 0..self.layers {
            self.rotation_layer(&mut state, &params[layer * per_layer..(layer + 1) * per_layer]);
            for q in 0..self.n_qubits.saturating_sub(1) {
                state.apply_cnot_in_place(q, q + 1);
            }
        }
        self.rotation_layer(&mut state, &params[self.layers * per_layer..]);
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::reconstruct;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
        let amps = (0..1 << n)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn init_zero_examples() {
        assert_eq!(StateVector::init_zero(1).unwrap().amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = StateVector::init_zero(2).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == c(0.0, 0.0)));
        assert!(matches!(StateVector::init_zero(13), Err(Error::SizeLimit { .. })));
        assert!(StateVector::init_zero(0).is_err());
    }

    #[test]
    fn zero_parameters_give_all_zeros() {
        let spec = AnsatzSpec::new(2, 1).unwrap();
        assert_eq!(spec.parameter_count(), 12);
        let s = spec.prepare(&vec![0.0; 12]).unwrap();
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ry_pi_then_cnot_gives_11() {
        let spec = AnsatzSpec::new(2, 1).unwrap();
        let mut params = vec![0.0; 12];
        params[1] = PI;
        let s = spec.prepare(&params).unwrap();
        assert!((s.amplitudes()[3].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prepare_rejects_wrong_length() {
        let spec = AnsatzSpec::new(2, 2).unwrap();
        assert!(matches!(
            spec.prepare(&[0.0; 5]),
            Err(Error::LengthMismatch { expected: 18, found: 5 })
        ));
        assert!(AnsatzSpec::new(2, 0).is_err());
    }

    #[test]
    fn prepare_is_deterministic_and_normalized() {
        let spec = AnsatzSpec::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p: Vec<f64> = (0..spec.parameter_count()).map(|_| rng.random_range(-PI..PI)).collect();
            let a = spec.prepare(&p).unwrap();
            let b = spec.prepare(&p).unwrap();
            assert_eq!(a, b);
            let direct: f64 = a.amplitudes().iter().map(|z| z.re * z.re + z.im * z.im).sum();
            assert!((direct.sqrt() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation_examples() {
        let zero = StateVector::init_zero(1).unwrap();
        let z = PauliString::parse("Z").unwrap();
        assert_eq!(zero.exact_expectation(&z).unwrap(), 1.0);

        let bell = StateVector::from_amplitudes(vec![
            c(FRAC_1_SQRT_2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let xx = PauliString::parse("XX").unwrap();
        assert!((bell.exact_expectation(&xx).unwrap() - 1.0).abs() < 1e-12);

        let plus = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        assert!(plus.exact_expectation(&z).unwrap().abs() < 1e-15);
        assert!(plus.exact_expectation(&xx).is_err());
    }

    #[test]
    fn energy_examples() {
        let h = PauliHamiltonian::from_labels(&[(2.0, "II")]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_state(2, &mut rng);
        assert!((s.exact_energy(&h).unwrap() - 2.0).abs() < 1e-12);

        let z = PauliHamiltonian::from_labels(&[(1.0, "Z")]).unwrap();
        let one = StateVector::basis_state(1, 1).unwrap();
        assert_eq!(one.exact_energy(&z).unwrap(), -1.0);
        assert!(s.exact_energy(&z).is_err());
    }

    #[test]
    fn energy_matches_dense_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let labels = ["II", "XI", "IY", "ZZ", "XY", "YX", "ZI", "YY"];
        for _ in 0..20 {
            let terms: Vec<(f64, &str)> =
                labels.iter().map(|&l| (rng.random_range(-1.0..1.0), l)).collect();
            let h = PauliHamiltonian::from_labels(&terms).unwrap();
            let s = random_state(2, &mut rng);
            let m = reconstruct(&h);
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            let quad = (v.adjoint() * m.matrix() * &v)[(0, 0)];
            assert!((s.exact_energy(&h).unwrap() - quad.re).abs() < 1e-10);
            assert!(quad.im.abs() < 1e-12);
        }
    }

    #[test]
    fn apply_unitary_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_state(2, &mut rng);
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert_eq!(s.apply_unitary(&id).unwrap(), s);

        let x = PauliString::parse("X").unwrap().matrix().into_matrix();
        let one = StateVector::init_zero(1).unwrap().apply_unitary(&x).unwrap();
        assert_eq!(one.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)]);

        let not_unitary = DMatrix::<Complex64>::identity(4, 4) * c(2.0, 0.0);
        assert!(matches!(s.apply_unitary(&not_unitary), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn random_unitary_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let raw = DMatrix::<Complex64>::from_fn(4, 4, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let q = raw.qr().q();
            let s = random_state(2, &mut rng);
            let out = s.apply_unitary(&q).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-10);
        }
    }
}
