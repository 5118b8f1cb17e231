#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vqe_core::fermion::MolecularIntegrals;
use vqe_core::{PauliHamiltonian, PauliString, StateVector};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pauli matrices written out by hand.
pub fn pauli_2x2(symbol: char) -> CMat {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match symbol {
        'I' => CMat::from_row_slice(2, 2, &[one, z, z, one]),
        'X' => CMat::from_row_slice(2, 2, &[z, one, one, z]),
        'Y' => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => CMat::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => panic!("bad symbol {symbol}"),
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    CMat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

/// Dense matrix of a label, leftmost character as the leftmost Kronecker factor.
pub fn label_matrix(label: &str) -> CMat {
    label
        .chars()
        .map(pauli_2x2)
        .reduce(|acc, m| kron(&acc, &m))
        .expect("non-empty label")
}

pub fn dense(h: &PauliHamiltonian) -> CMat {
    let dim = 1usize << h.n_qubits();
    let mut m = CMat::zeros(dim, dim);
    for (coef, p) in h.terms() {
        m += label_matrix(&p.to_string()) * c(coef, 0.0);
    }
    m
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn gaussian(r: &mut impl Rng) -> f64 {
    StandardNormal.sample(r)
}

pub fn random_hermitian(r: &mut impl Rng, dim: usize) -> CMat {
    let a = CMat::from_fn(dim, dim, |_, _| c(gaussian(r), gaussian(r)));
    (&a + a.adjoint()) * c(0.5, 0.0)
}

pub fn random_unitary(r: &mut impl Rng, dim: usize) -> CMat {
    let a = CMat::from_fn(dim, dim, |_, _| c(gaussian(r), gaussian(r)));
    a.qr().q()
}

pub fn random_state(r: &mut impl Rng, n_qubits: usize) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << n_qubits).map(|_| c(gaussian(r), gaussian(r))).collect();
    StateVector::normalized(amps).unwrap()
}

pub fn random_label(r: &mut impl Rng, n: usize) -> String {
    (0..n).map(|_| ['I', 'X', 'Y', 'Z'][r.random_range(0..4)]).collect()
}

/// All sixteen two-qubit strings with coefficients uniform in [-1, 1].
pub fn random_two_qubit_hamiltonian(seed: u64) -> PauliHamiltonian {
    let mut r = rng(seed);
    let symbols = ['I', 'X', 'Y', 'Z'];
    let mut terms = Vec::new();
    for a in symbols {
        for b in symbols {
            let coef = r.random_range(-1.0..=1.0);
            terms.push((coef, PauliString::parse(&format!("{a}{b}")).unwrap()));
        }
    }
    PauliHamiltonian::from_terms(2, terms).unwrap()
}

pub fn state_vec(s: &StateVector) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(s.amplitudes())
}

/// Roots of the characteristic polynomial of a Hermitian matrix: coefficients
/// from Faddeev-LeVerrier, roots by Durand-Kerner iteration.
pub fn characteristic_roots(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    // p(x) = x^n + c[1] x^{n-1} + ... + c[n]
    let mut coeffs = vec![c(1.0, 0.0)];
    let ident = CMat::identity(n, n);
    let mut mk = CMat::zeros(n, n);
    for k in 1..=n {
        mk = m * &mk + &ident * coeffs[k - 1];
        let ck = -(m * &mk).trace() / c(k as f64, 0.0);
        coeffs.push(ck);
    }
    let eval = |x: Complex64| coeffs.iter().fold(c(0.0, 0.0), |acc, &a| acc * x + a);
    let mut roots: Vec<Complex64> = (0..n).map(|k| c(0.4, 0.9).powu(k as u32)).collect();
    for _ in 0..500 {
        for i in 0..n {
            let mut denom = c(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
    }
    let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    re
}

/// Random real integrals with h_pq = h_qp and h_pqrs = h_srqp, so the
/// second-quantized Hamiltonian is Hermitian.
pub fn random_symmetric_integrals(seed: u64, n: usize) -> MolecularIntegrals {
    let mut r = rng(seed);
    let mut one_body = Vec::new();
    for p in 1..=n {
        for q in p..=n {
            let v = r.random_range(-1.0..1.0);
            one_body.push((p, q, v));
            if p != q {
                one_body.push((q, p, v));
            }
        }
    }
    let mut two_body = Vec::new();
    for _ in 0..6 {
        let idx: Vec<usize> = (0..4).map(|_| r.random_range(1..=n)).collect();
        let v = r.random_range(-0.5..0.5);
        let (p, q, s_, t) = (idx[0], idx[1], idx[2], idx[3]);
        two_body.push((p, q, s_, t, v));
        two_body.push((t, s_, q, p, v));
    }
    MolecularIntegrals { n_modes: n, one_body, two_body }
}
