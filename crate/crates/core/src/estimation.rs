//! Shot-based estimation of Pauli expectations and Hamiltonian energies.
//!
//! Each non-identity term is measured on its own freshly prepared copy of the
//! state: the register is rotated into the term's eigenbasis, bitstrings are
//! drawn from the Born distribution, and each shot scores the product of the
//! `+-1` eigenvalues on the term's support. Per-term standard errors are
//! combined assuming independent preparations.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliHamiltonian, PauliString};
use crate::statevector::{hadamard, rz, StatePreparation, StateVector};

/// How term expectations are obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ShotPolicy {
    /// Noiseless expectation values.
    #[default]
    Exact,
    /// The same number of shots for every non-identity term.
    FixedShots(u64),
    /// Per-term shots `max(1, ceil(h_i^2 / p^2))` for target precision `p`.
    Precision(f64),
}

impl ShotPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ShotPolicy::Exact => Ok(()),
            ShotPolicy::FixedShots(0) => Err(Error::InvalidPolicy("shot count must be at least 1".into())),
            ShotPolicy::FixedShots(_) => Ok(()),
            ShotPolicy::Precision(p) if p > 0.0 && p <= 1.0 => Ok(()),
            ShotPolicy::Precision(p) => Err(Error::InvalidPolicy(format!(
                "precision must lie in (0, 1], got {p}"
            ))),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ShotPolicy::Exact)
    }

    /// Shots allocated to a term with the given coefficient. Identity strings
    /// are never sampled and exact mode uses no shots; both return 0.
    pub fn shots_for_term(&self, coefficient: f64, string: &PauliString) -> u64 {
        if string.is_identity() {
            return 0;
        }
        match *self {
            ShotPolicy::Exact => 0,
            ShotPolicy::FixedShots(s) => s,
            ShotPolicy::Precision(p) => precision_shots(coefficient, p),
        }
    }

    /// Total shots for one evaluation of `h`, with the per-term breakdown.
    pub fn shot_budget(&self, h: &PauliHamiltonian) -> (Vec<u64>, u64) {
        let per_term: Vec<u64> = h.terms().map(|(c, p)| self.shots_for_term(c, p)).collect();
        let total = per_term.iter().sum();
        (per_term, total)
    }
}

/// `max(1, ceil(h^2 / p^2))`, treating ratios within 1e-9 (relative) of an
/// integer as that integer so that e.g. `1 / 0.01^2` gives exactly 10000.
pub fn precision_shots(coefficient: f64, precision: f64) -> u64 {
    let ratio = (coefficient / precision).powi(2);
    let nearest = ratio.round();
    let shots = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    (shots as u64).max(1)
}

impl fmt::Display for ShotPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShotPolicy::Exact => write!(f, "exact"),
            ShotPolicy::FixedShots(s) => write!(f, "shots:{s}"),
            ShotPolicy::Precision(p) => write!(f, "precision:{p}"),
        }
    }
}

impl FromStr for ShotPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let policy = if s == "exact" {
            ShotPolicy::Exact
        } else if let Some(v) = s.strip_prefix("shots:") {
            ShotPolicy::FixedShots(
                v.trim()
                    .parse()
                    .map_err(|_| Error::InvalidPolicy(format!("bad shot count {v:?}")))?,
            )
        } else if let Some(v) = s.strip_prefix("precision:") {
            ShotPolicy::Precision(
                v.trim()
                    .parse()
                    .map_err(|_| Error::InvalidPolicy(format!("bad precision {v:?}")))?,
            )
        } else {
            return Err(Error::InvalidPolicy(format!(
                "expected `exact`, `shots:<S>` or `precision:<p>`, got {s:?}"
            )));
        };
        policy.validate()?;
        Ok(policy)
    }
}

impl TryFrom<String> for ShotPolicy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ShotPolicy> for String {
    fn from(p: ShotPolicy) -> String {
        p.to_string()
    }
}

/// Deterministic random stream identified by `(seed, term, iteration)`.
///
/// Distinct labels map to disjoint ChaCha streams of the same key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub term: u32,
    pub iteration: u32,
}

impl RngStream {
    pub fn new(seed: u64, term: u32, iteration: u32) -> Self {
        Self {
            seed,
            term,
            iteration,
        }
    }

    /// Stream for the given objective evaluation; terms are selected with [`RngStream::for_term`].
    pub fn evaluation(seed: u64, iteration: u32) -> Self {
        Self::new(seed, 0, iteration)
    }

    pub fn for_term(self, term: u32) -> Self {
        Self { term, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((self.iteration as u64) << 32) | self.term as u64);
        rng
    }
}

/// SplitMix64 mixing of a seed with a tag, for deriving independent sub-seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliSample {
    pub mean: f64,
    pub std_error: f64,
}

/// Probability that a measurement of `p` on `state` yields `+1`.
fn plus_probability(state: &StateVector, p: &PauliString) -> f64 {
    let mut rotated = state.clone();
    let sdg = rz(-std::f64::consts::FRAC_PI_2);
    let h = hadamard();
    for (q, &f) in p.factors().iter().enumerate() {
        match f {
            Pauli::X => rotated.apply_gate_in_place(q, &h),
            Pauli::Y => {
                rotated.apply_gate_in_place(q, &sdg);
                rotated.apply_gate_in_place(q, &h);
            }
            Pauli::I | Pauli::Z => {}
        }
    }
    let n = p.n_qubits();
    let support = p
        .factors()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f != Pauli::I)
        .fold(0usize, |m, (q, _)| m | (1 << (n - 1 - q)));
    rotated
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(k, _)| (k & support).count_ones() % 2 == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Estimates `<P>` from `shots` projective measurements.
///
/// Every shot draws a bitstring from the rotated state's Born distribution
/// and scores the parity of its support bits. Only the parity enters the
/// estimate, so the number of `+1` outcomes is drawn directly from its
/// binomial law, which is the same distribution as scoring `shots`
/// individual bitstrings.
///
/// The standard error is the sample standard deviation over `sqrt(shots)`.
/// A single shot carries no spread information; the `+-1` outcome bound of 1
/// is reported instead.
pub fn sample_pauli(
    state: &StateVector,
    p: &PauliString,
    shots: u64,
    stream: &RngStream,
) -> Result<PauliSample> {
    if p.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: state.n_qubits(),
            found: p.n_qubits(),
        });
    }
    if shots == 0 {
        return Err(Error::InvalidPolicy("shot count must be at least 1".into()));
    }
    if p.is_identity() {
        return Ok(PauliSample {
            mean: 1.0,
            std_error: 0.0,
        });
    }
    let p_plus = plus_probability(state, p);
    let mut rng = stream.rng();
    let plus = Binomial::new(shots, p_plus)
        .expect("probability clamped to [0, 1]")
        .sample(&mut rng);
    Ok(summarize(plus, shots))
}

fn summarize(plus: u64, shots: u64) -> PauliSample {
    let s = shots as f64;
    let mean = (2.0 * plus as f64 - s) / s;
    let std_error = if shots == 1 {
        1.0
    } else {
        let var = (s * (1.0 - mean * mean) / (s - 1.0)).max(0.0);
        (var / s).sqrt()
    };
    PauliSample { mean, std_error }
}

/// Per-shot reference sampler: draws every bitstring explicitly.
///
/// Slower than [`sample_pauli`] but follows the measurement procedure shot by
/// shot; kept for cross-checking the two.
pub fn sample_pauli_per_shot(
    state: &StateVector,
    p: &PauliString,
    shots: u64,
    stream: &RngStream,
) -> Result<PauliSample> {
    if p.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: state.n_qubits(),
            found: p.n_qubits(),
        });
    }
    if shots == 0 {
        return Err(Error::InvalidPolicy("shot count must be at least 1".into()));
    }
    if p.is_identity() {
        return Ok(PauliSample {
            mean: 1.0,
            std_error: 0.0,
        });
    }
    let mut rotated = state.clone();
    for (q, &f) in p.factors().iter().enumerate() {
        match f {
            Pauli::X => rotated.apply_gate_in_place(q, &hadamard()),
            Pauli::Y => {
                rotated.apply_gate_in_place(q, &rz(-std::f64::consts::FRAC_PI_2));
                rotated.apply_gate_in_place(q, &hadamard());
            }
            _ => {}
        }
    }
    let mut cdf = Vec::with_capacity(rotated.dim());
    let mut acc = 0.0;
    for a in rotated.amplitudes() {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let n = p.n_qubits();
    let mut rng = stream.rng();
    let mut plus = 0u64;
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        let parity = p
            .factors()
            .iter()
            .enumerate()
            .filter(|(q, &f)| f != Pauli::I && (k >> (n - 1 - q)) & 1 == 1)
            .count();
        if parity % 2 == 0 {
            plus += 1;
        }
    }
    Ok(summarize(plus, shots))
}

/// Result of estimating `<H>` for one prepared state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Shots spent on each term, in the Hamiltonian's term order.
    pub shots_per_term: Vec<u64>,
    pub total_shots: u64,
}

/// Estimates `<H>` on an already prepared state.
///
/// Term `i` draws from `stream.for_term(i)`.
pub fn estimate_state_energy(
    state: &StateVector,
    h: &PauliHamiltonian,
    policy: ShotPolicy,
    stream: &RngStream,
) -> Result<EnergyEstimate> {
    policy.validate()?;
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: state.n_qubits(),
            found: h.n_qubits(),
        });
    }
    if policy.is_exact() {
        return Ok(EnergyEstimate {
            value: state.exact_energy(h)?,
            std_error: 0.0,
            shots_per_term: vec![0; h.len()],
            total_shots: 0,
        });
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    let mut shots_per_term = Vec::with_capacity(h.len());
    for (i, (c, p)) in h.terms().enumerate() {
        let shots = policy.shots_for_term(c, p);
        shots_per_term.push(shots);
        if p.is_identity() {
            value += c;
            continue;
        }
        let sample = sample_pauli(state, p, shots, &stream.for_term(i as u32))?;
        value += c * sample.mean;
        variance += c * c * sample.std_error * sample.std_error;
    }
    Ok(EnergyEstimate {
        value,
        std_error: variance.sqrt(),
        total_shots: shots_per_term.iter().sum(),
        shots_per_term,
    })
}

/// Prepares the ansatz state at `params` and estimates `<H>` on it.
///
/// Preparation is deterministic, so one prepared state serves every term; each
/// term still measures an independent copy.
pub fn estimate_energy<A: StatePreparation + ?Sized>(
    ansatz: &A,
    params: &[f64],
    h: &PauliHamiltonian,
    policy: ShotPolicy,
    stream: &RngStream,
) -> Result<EnergyEstimate> {
    if ansatz.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: ansatz.n_qubits(),
            found: h.n_qubits(),
        });
    }
    let state = ansatz.prepare(params)?;
    estimate_state_energy(&state, h, policy, stream)
}
