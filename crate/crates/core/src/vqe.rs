//! The variational loop: a classical minimizer drives the energy estimator
//! over ansatz parameters, and every accepted iterate is logged with exact
//! diagnostics.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{exact_spectrum, tangle, Spectrum, MAX_SPECTRUM_QUBITS};
use crate::error::{Error, Result};
use crate::estimation::{derive_seed, estimate_energy, EnergyEstimate, RngStream, ShotPolicy};
use crate::optimize::{
    gradient_descent, nelder_mead, GradientDescentConfig, NelderMeadConfig, OptimizeOutcome,
    StopReason,
};
use crate::pauli::{reconstruct, shift_and_square, PauliHamiltonian};
use crate::statevector::{StatePreparation, StateVector};

const INIT_TAG: u64 = 0x696e_6974;
const NOISE_TAG: u64 = 0x6e6f_6973;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    NelderMead(NelderMeadConfig),
    GradientDescent(GradientDescentConfig),
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::NelderMead(NelderMeadConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeSettings {
    pub policy: ShotPolicy,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Starting parameters; drawn uniformly from `[-pi, pi)` when absent.
    pub initial: Option<Vec<f64>>,
    /// Constant added to every estimate. Zero unless emulating a biased device.
    pub systematic_shift: f64,
}

impl VqeSettings {
    pub fn new(policy: ShotPolicy, seed: u64) -> Self {
        Self {
            policy,
            optimizer: Optimizer::default(),
            seed,
            initial: None,
            systematic_shift: 0.0,
        }
    }

    pub fn with_optimizer(mut self, optimizer: Optimizer) -> Self {
        self.optimizer = optimizer;
        self
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Self {
        self.initial = Some(initial);
        self
    }
}

/// Uniform starting point in `[-pi, pi)` derived from the run seed.
pub fn random_start(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, INIT_TAG));
    (0..len).map(|_| rng.random_range(-PI..PI)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeRecord {
    pub j: usize,
    pub evaluation: usize,
    pub parameters: Vec<f64>,
    pub energy_estimate: f64,
    pub std_error: f64,
    pub exact_energy: f64,
    /// Only recorded for two-qubit registers.
    pub tangle: Option<f64>,
    /// Weight of the state in the exact ground eigenspace; absent for registers
    /// too large to diagonalize.
    pub overlap: Option<f64>,
    pub restart: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeTrace {
    pub records: Vec<VqeRecord>,
    pub best_parameters: Vec<f64>,
    pub best_energy: f64,
    pub evaluations: usize,
    pub restarts: usize,
}

impl VqeTrace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "j,energy_estimate,std_error,exact_energy,tangle,overlap,restart_flag")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.j,
                r.energy_estimate,
                r.std_error,
                r.exact_energy,
                opt(r.tangle),
                opt(r.overlap),
                u8::from(r.restart)
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub trace: VqeTrace,
    pub converged: bool,
    pub reason: StopReason,
    /// Independent re-estimate at the best parameters, free of the selection
    /// bias carried by `trace.best_energy` under shot noise.
    pub final_estimate: EnergyEstimate,
    pub final_exact_energy: f64,
    /// Lowest eigenvalue of the objective Hamiltonian, when it was diagonalized.
    pub ground_energy: Option<f64>,
}

/// Machine-readable run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeSummary {
    pub best_parameters: Vec<f64>,
    pub best_energy: f64,
    pub evaluations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub reason: StopReason,
    pub final_estimate: f64,
    pub final_std_error: f64,
    pub final_exact_energy: f64,
    pub ground_energy: Option<f64>,
}

impl VqeResult {
    pub fn summary(&self) -> VqeSummary {
        VqeSummary {
            best_parameters: self.trace.best_parameters.clone(),
            best_energy: self.trace.best_energy,
            evaluations: self.trace.evaluations,
            restarts: self.trace.restarts,
            converged: self.converged,
            reason: self.reason,
            final_estimate: self.final_estimate.value,
            final_std_error: self.final_estimate.std_error,
            final_exact_energy: self.final_exact_energy,
            ground_energy: self.ground_energy,
        }
    }
}

/// Minimizes the estimated energy `<psi(theta)|H|psi(theta)>` over the
/// ansatz parameters.
///
/// Evaluation `k` draws its shot noise from stream `(seed', term, k)` where
/// `seed'` is derived from the run seed, so repeated visits to one point see
/// independent noise and the whole run is reproducible from the seed.
pub fn run_vqe<A: StatePreparation + ?Sized>(
    h: &PauliHamiltonian,
    ansatz: &A,
    settings: &VqeSettings,
) -> Result<VqeResult> {
    if h.n_qubits() != ansatz.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: ansatz.n_qubits(),
            found: h.n_qubits(),
        });
    }
    settings.policy.validate()?;
    let n_params = ansatz.parameter_count();
    let x0 = match &settings.initial {
        Some(x) if x.len() != n_params => {
            return Err(Error::LengthMismatch {
                expected: n_params,
                found: x.len(),
            })
        }
        Some(x) => x.clone(),
        None => random_start(settings.seed, n_params),
    };
    let spectrum = if h.n_qubits() <= MAX_SPECTRUM_QUBITS {
        Some(exact_spectrum(h)?)
    } else {
        None
    };

    let noise_seed = derive_seed(settings.seed, NOISE_TAG);
    let mut estimates: Vec<EnergyEstimate> = Vec::new();
    let objective = |x: &[f64], idx: usize| -> Result<f64> {
        let stream = RngStream::evaluation(noise_seed, idx as u32);
        let mut e = estimate_energy(ansatz, x, h, settings.policy, &stream)?;
        e.value += settings.systematic_shift;
        let v = e.value;
        estimates.push(e);
        Ok(v)
    };
    let outcome: OptimizeOutcome = match &settings.optimizer {
        Optimizer::NelderMead(cfg) => nelder_mead(objective, &x0, cfg)?,
        Optimizer::GradientDescent(cfg) => gradient_descent(objective, &x0, cfg)?,
    };
    if outcome.evaluations == 0 {
        return Err(Error::InvalidOptimizer("evaluation budget of zero".into()));
    }

    let mut records = Vec::with_capacity(outcome.accepted.len());
    for (j, p) in outcome.accepted.iter().enumerate() {
        let state = ansatz.prepare(&p.x)?;
        let (exact, tangle, overlap) = diagnostics(&state, h, spectrum.as_ref())?;
        records.push(VqeRecord {
            j,
            evaluation: p.evaluation,
            parameters: p.x.clone(),
            energy_estimate: p.f,
            std_error: estimates[p.evaluation].std_error,
            exact_energy: exact,
            tangle,
            overlap,
            restart: p.restart,
        });
    }

    let stream = RngStream::evaluation(noise_seed, outcome.evaluations as u32);
    let mut final_estimate = estimate_energy(ansatz, &outcome.x_best, h, settings.policy, &stream)?;
    final_estimate.value += settings.systematic_shift;
    let final_exact_energy = ansatz.prepare(&outcome.x_best)?.exact_energy(h)?;

    Ok(VqeResult {
        converged: outcome.converged(),
        reason: outcome.reason,
        final_estimate,
        final_exact_energy,
        ground_energy: spectrum.as_ref().map(Spectrum::ground_energy),
        trace: VqeTrace {
            records,
            best_parameters: outcome.x_best,
            best_energy: outcome.f_best,
            evaluations: outcome.evaluations,
            restarts: outcome.restarts,
        },
    })
}

fn diagnostics(
    state: &StateVector,
    h: &PauliHamiltonian,
    spectrum: Option<&Spectrum>,
) -> Result<(f64, Option<f64>, Option<f64>)> {
    let exact = state.exact_energy(h)?;
    let t = if state.n_qubits() == 2 {
        Some(tangle(state)?)
    } else {
        None
    };
    let overlap = spectrum.map(|s| s.ground_overlap(state)).transpose()?;
    Ok((exact, t, overlap))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldedResult {
    pub lambda: f64,
    /// Run on `(H - lambda)^2`; its energies are folded-objective values.
    pub result: VqeResult,
    /// `<psi|H|psi>` for the returned state.
    pub recovered_eigenvalue: f64,
    /// Shot estimate of `<H>` at the returned state under the run's policy.
    pub eigenvalue_estimate: EnergyEstimate,
    /// `||(H - E) psi||`, small when the state is an eigenvector.
    pub residual: f64,
}

const FOLD_TAG: u64 = 0x666f_6c64;

/// Targets the eigenvector of `h` whose eigenvalue is closest to `lambda` by
/// minimizing `(H - lambda)^2`.
pub fn run_folded<A: StatePreparation + ?Sized>(
    h: &PauliHamiltonian,
    lambda: f64,
    ansatz: &A,
    settings: &VqeSettings,
) -> Result<FoldedResult> {
    let folded = shift_and_square(h, lambda)?;
    let result = run_vqe(&folded, ansatz, settings)?;
    let state = ansatz.prepare(&result.trace.best_parameters)?;
    let recovered_eigenvalue = state.exact_energy(h)?;
    let stream = RngStream::evaluation(derive_seed(settings.seed, FOLD_TAG), 0);
    let mut eigenvalue_estimate = estimate_energy(ansatz, &result.trace.best_parameters, h, settings.policy, &stream)?;
    eigenvalue_estimate.value += settings.systematic_shift;
    let residual = if h.n_qubits() <= MAX_SPECTRUM_QUBITS {
        let m = reconstruct(h);
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        (m.matrix() * &v - &v * num_complex::Complex64::from(recovered_eigenvalue)).norm()
    } else {
        f64::NAN
    };
    Ok(FoldedResult {
        lambda,
        result,
        recovered_eigenvalue,
        eigenvalue_estimate,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::AnsatzSpec;

    #[test]
    fn single_z_reaches_minus_one() {
        let h = PauliHamiltonian::from_labels(&[(1.0, "Z")]).unwrap();
        let spec = AnsatzSpec::new(1, 1).unwrap();
        let r = run_vqe(&h, &spec, &VqeSettings::new(ShotPolicy::Exact, 1)).unwrap();
        assert!((r.trace.best_energy + 1.0).abs() < 1e-6);
        assert!((r.final_exact_energy + 1.0).abs() < 1e-6);
    }

    #[test]
    fn zz_reaches_minus_one() {
        let h = PauliHamiltonian::from_labels(&[(1.0, "ZZ")]).unwrap();
        let spec = AnsatzSpec::new(2, 1).unwrap();
        let r = run_vqe(&h, &spec, &VqeSettings::new(ShotPolicy::Exact, 2)).unwrap();
        assert!((r.trace.best_energy + 1.0).abs() < 1e-6);
        let last = r.trace.records.last().unwrap();
        assert!(last.overlap.unwrap() > 0.99);
    }

    #[test]
    fn trace_invariants() {
        let h = PauliHamiltonian::from_labels(&[(0.5, "XZ"), (-0.8, "ZY"), (0.3, "YY")]).unwrap();
        let spec = AnsatzSpec::new(2, 1).unwrap();
        let r = run_vqe(&h, &spec, &VqeSettings::new(ShotPolicy::FixedShots(200), 3)).unwrap();
        let recs = &r.trace.records;
        assert!(recs.windows(2).all(|w| w[0].j < w[1].j));
        let min = recs.iter().map(|r| r.energy_estimate).fold(f64::INFINITY, f64::min);
        assert_eq!(min, r.trace.best_energy);
        assert!(recs.iter().all(|r| r.tangle.is_some_and(|t| (0.0..=1.0).contains(&t))));
    }

    #[test]
    fn runs_are_reproducible() {
        let h = PauliHamiltonian::from_labels(&[(0.5, "XZ"), (-0.8, "ZY")]).unwrap();
        let spec = AnsatzSpec::new(2, 1).unwrap();
        let mut s = VqeSettings::new(ShotPolicy::FixedShots(50), 11);
        s.optimizer = Optimizer::NelderMead(NelderMeadConfig {
            max_evaluations: 500,
            ..Default::default()
        });
        let a = run_vqe(&h, &spec, &s).unwrap();
        let b = run_vqe(&h, &spec, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.to_csv(), b.trace.to_csv());
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let h = PauliHamiltonian::from_labels(&[(1.0, "ZZ")]).unwrap();
        let spec = AnsatzSpec::new(1, 1).unwrap();
        assert!(run_vqe(&h, &spec, &VqeSettings::new(ShotPolicy::Exact, 0)).is_err());
        let spec = AnsatzSpec::new(2, 1).unwrap();
        let s = VqeSettings::new(ShotPolicy::Exact, 0).with_initial(vec![0.0; 3]);
        assert!(run_vqe(&h, &spec, &s).is_err());
    }

    #[test]
    fn csv_layout() {
        let h = PauliHamiltonian::from_labels(&[(1.0, "Z")]).unwrap();
        let spec = AnsatzSpec::new(1, 1).unwrap();
        let mut s = VqeSettings::new(ShotPolicy::Exact, 1);
        s.optimizer = Optimizer::NelderMead(NelderMeadConfig {
            max_evaluations: 10,
            ..Default::default()
        });
        let r = run_vqe(&h, &spec, &s).unwrap();
        let csv = r.trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "j,energy_estimate,std_error,exact_energy,tangle,overlap,restart_flag"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 7);
        assert_eq!(first[0], "0");
        assert_eq!(first[4], "");
    }
}
