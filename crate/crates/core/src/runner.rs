//! Experiment runner behind the `vqe` command: run configuration, input
//! file formats, dry-run validation, and artifact emission.
//!
//! Every mode writes `config.json` (the effective configuration) into the
//! output directory next to its results, so a run can be repeated from its
//! own artifacts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    exact_spectrum, fit_quadratic_minimum, monte_carlo_minimum_uncertainty, FitPoint,
    MinimumUncertainty, QuadraticFit,
};
use crate::error::{Error, Result};
use crate::estimation::{derive_seed, ShotPolicy};
use crate::fermion::{build_molecular_hamiltonian, jordan_wigner, ucc_vqe, MolecularIntegrals, UccAnsatz};
use crate::pauli::PauliHamiltonian;
use crate::statevector::{AnsatzSpec, StatePreparation};
use crate::vqe::{run_folded, run_vqe, FoldedResult, Optimizer, VqeResult, VqeSettings, VqeSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Vqe,
    Folded,
    Scan,
    Ucc,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Vqe => "vqe",
            RunMode::Folded => "folded",
            RunMode::Scan => "scan",
            RunMode::Ucc => "ucc",
        })
    }
}

fn default_layers() -> usize {
    1
}

fn default_excitation_level() -> u8 {
    2
}

fn default_mc_samples() -> usize {
    10_000
}

/// One flat JSON document describing a run. Relative input paths in a config
/// file are resolved against the file's directory by [`RunConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: RunMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrals: Option<PathBuf>,
    /// Expected register size; checked against the inputs when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default = "default_layers")]
    pub layers: usize,
    /// Occupation bitstring for UCC runs, mode 1 first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default = "default_excitation_level")]
    pub excitation_level: u8,
    #[serde(default)]
    pub policy: ShotPolicy,
    #[serde(default)]
    pub optimizer: Optimizer,
    /// Mandatory; there is no clock-derived default.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub systematic_shift: f64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn new(mode: RunMode) -> Self {
        Self {
            mode,
            hamiltonian: None,
            scan: None,
            integrals: None,
            n_qubits: None,
            layers: default_layers(),
            reference: None,
            excitation_level: default_excitation_level(),
            policy: ShotPolicy::default(),
            optimizer: Optimizer::default(),
            seed: None,
            out: None,
            fit_window: None,
            lambda: Vec::new(),
            systematic_shift: 0.0,
            mc_samples: default_mc_samples(),
            initial: None,
        }
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json {
            path: source.to_string(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&read(path)?, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.hamiltonian, &mut cfg.scan, &mut cfg.integrals]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (set `seed` or pass --seed)".into()))
    }

    fn settings(&self, seed: u64) -> VqeSettings {
        VqeSettings {
            policy: self.policy,
            optimizer: self.optimizer.clone(),
            seed,
            initial: self.initial.clone(),
            systematic_shift: self.systematic_shift,
        }
    }

    /// Checks everything that does not need the input files.
    pub fn check(&self) -> Result<()> {
        self.seed()?;
        self.policy.validate()?;
        if let Optimizer::NelderMead(cfg) = &self.optimizer {
            cfg.validate()?;
        }
        if !self.systematic_shift.is_finite() {
            return Err(Error::Config("systematic_shift must be finite".into()));
        }
        let need = |field: &Option<PathBuf>, name: &str| {
            if field.is_none() {
                Err(Error::Config(format!("mode {} requires `{name}`", self.mode)))
            } else {
                Ok(())
            }
        };
        match self.mode {
            RunMode::Vqe => need(&self.hamiltonian, "hamiltonian")?,
            RunMode::Folded => {
                need(&self.hamiltonian, "hamiltonian")?;
                if self.lambda.is_empty() {
                    return Err(Error::Config("mode folded requires at least one `lambda`".into()));
                }
                if self.lambda.iter().any(|l| !l.is_finite()) {
                    return Err(Error::Config("lambda values must be finite".into()));
                }
            }
            RunMode::Scan => {
                need(&self.scan, "scan")?;
                if self.mc_samples < 1000 {
                    return Err(Error::Config("mc_samples must be at least 1000".into()));
                }
                if let Some([lo, hi]) = self.fit_window {
                    if !(lo < hi) {
                        return Err(Error::Config(format!("fit window [{lo}, {hi}] is empty")));
                    }
                }
            }
            RunMode::Ucc => {
                if self.integrals.is_none() && self.hamiltonian.is_none() {
                    return Err(Error::Config("mode ucc requires `integrals` or `hamiltonian`".into()));
                }
                if self.reference.is_none() {
                    return Err(Error::Config("mode ucc requires `reference`".into()));
                }
            }
        }
        if self.mode != RunMode::Ucc && self.layers == 0 {
            return Err(Error::Config("layers must be at least 1".into()));
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_hamiltonian(path: &Path) -> Result<PauliHamiltonian> {
    PauliHamiltonian::parse_text(&read(path)?, &path.display().to_string())
}

pub fn load_integrals(path: &Path) -> Result<MolecularIntegrals> {
    MolecularIntegrals::from_json(&read(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub r: f64,
    pub hamiltonian: PauliHamiltonian,
}

/// Hamiltonians labelled by a strictly increasing coordinate `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanInput {
    points: Vec<ScanPoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanEntry {
    #[serde(rename = "R")]
    r: f64,
    terms: Vec<(f64, String)>,
}

impl ScanInput {
    pub fn new(points: Vec<ScanPoint>) -> Result<Self> {
        Self::checked(points, "scan")
    }

    fn checked(points: Vec<ScanPoint>, source: &str) -> Result<Self> {
        let bad = |message: String| Error::InvalidInput {
            path: source.to_string(),
            message,
        };
        let Some(first) = points.first() else {
            return Err(bad("scan contains no points".into()));
        };
        let n = first.hamiltonian.n_qubits();
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].r > w[0].r) {
                return Err(bad(format!(
                    "entry {}: R = {} does not exceed the previous R = {}",
                    i + 1,
                    w[1].r,
                    w[0].r
                )));
            }
        }
        for (i, p) in points.iter().enumerate() {
            if !p.r.is_finite() {
                return Err(bad(format!("entry {i}: R is not finite")));
            }
            if p.hamiltonian.n_qubits() != n {
                return Err(bad(format!(
                    "entry {i} (R = {}): {} qubits, expected {n}",
                    p.r,
                    p.hamiltonian.n_qubits()
                )));
            }
        }
        Ok(Self { points })
    }

    /// Parses `[{"R": r, "terms": [[coefficient, label], ...]}, ...]`.
    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let entries: Vec<ScanEntry> = serde_json::from_str(text).map_err(|e| Error::Json {
            path: source.to_string(),
            source: e,
        })?;
        let mut points = Vec::with_capacity(entries.len());
        for (i, e) in entries.into_iter().enumerate() {
            let labels: Vec<(f64, &str)> = e.terms.iter().map(|(c, l)| (*c, l.as_str())).collect();
            let h = PauliHamiltonian::from_labels(&labels).map_err(|err| Error::InvalidInput {
                path: source.to_string(),
                message: format!("entry {i} (R = {}): {err}", e.r),
            })?;
            points.push(ScanPoint { r: e.r, hamiltonian: h });
        }
        Self::checked(points, source)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<serde_json::Value> = self
            .points
            .iter()
            .map(|p| {
                let terms: Vec<(f64, String)> =
                    p.hamiltonian.terms().map(|(c, s)| (c, s.to_string())).collect();
                serde_json::json!({ "R": p.r, "terms": terms })
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("scan serializes")
    }

    pub fn points(&self) -> &[ScanPoint] {
        &self.points
    }

    pub fn n_qubits(&self) -> usize {
        self.points[0].hamiltonian.n_qubits()
    }
}

/// One curve sample: estimate at the optimized state, its standard error, and
/// the exact ground energy of that point's Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub r: f64,
    pub e_est: f64,
    pub e_exact: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    InverseVariance,
    /// Used when some point has no error estimate (exact mode); the
    /// covariance is then rescaled by the residual variance.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFit {
    pub window: Option<[f64; 2]>,
    pub points_used: usize,
    pub weighting: Weighting,
    pub fit: QuadraticFit,
    pub r_min: Option<f64>,
    pub e_min: Option<f64>,
    /// Absent when the fitted parabola has no minimum.
    pub uncertainty: Option<MinimumUncertainty>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub rows: Vec<CurveRow>,
    pub results: Vec<VqeResult>,
    pub fit: ScanFit,
}

const MC_TAG: u64 = 0x6d63;

/// Runs VQE at every scan point (in parallel, point `i` seeded by
/// `derive_seed(seed, i)`), then fits a parabola over the window and
/// propagates its covariance to the minimum by Monte Carlo.
pub fn run_scan(
    input: &ScanInput,
    ansatz: &AnsatzSpec,
    settings: &VqeSettings,
    window: Option<[f64; 2]>,
    mc_samples: usize,
) -> Result<ScanOutcome> {
    let runs: Vec<(CurveRow, VqeResult)> = input
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut s = settings.clone();
            s.seed = derive_seed(settings.seed, i as u64);
            let result = run_vqe(&p.hamiltonian, ansatz, &s)?;
            let e_exact = match result.ground_energy {
                Some(e) => e,
                None => exact_spectrum(&p.hamiltonian)?.ground_energy(),
            };
            let row = CurveRow {
                r: p.r,
                e_est: result.final_estimate.value,
                e_exact,
                std_error: result.final_estimate.std_error,
            };
            Ok((row, result))
        })
        .collect::<Result<_>>()?;
    let (rows, results): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let fit = fit_curve(&rows, window, mc_samples, derive_seed(settings.seed, MC_TAG))?;
    Ok(ScanOutcome { rows, results, fit })
}

/// Weighted parabola fit over the rows inside `window` (inclusive).
pub fn fit_curve(
    rows: &[CurveRow],
    window: Option<[f64; 2]>,
    mc_samples: usize,
    seed: u64,
) -> Result<ScanFit> {
    let selected: Vec<&CurveRow> = rows
        .iter()
        .filter(|row| window.is_none_or(|[lo, hi]| row.r >= lo && row.r <= hi))
        .collect();
    let weighting = if selected.iter().all(|row| row.std_error > 0.0) {
        Weighting::InverseVariance
    } else {
        Weighting::Uniform
    };
    let points: Vec<FitPoint> = selected
        .iter()
        .map(|row| FitPoint {
            r: row.r,
            energy: row.e_est,
            variance: match weighting {
                Weighting::InverseVariance => row.std_error * row.std_error,
                Weighting::Uniform => 1.0,
            },
        })
        .collect();
    let mut fit = fit_quadratic_minimum(&points)?;
    if weighting == Weighting::Uniform {
        let dof = points.len() - 3;
        let residual_variance = fit.chi_square / dof as f64;
        fit = fit.with_covariance_scaled(residual_variance);
    }
    let uncertainty = if fit.r_min.is_some() {
        Some(monte_carlo_minimum_uncertainty(&fit, mc_samples, seed)?)
    } else {
        None
    };
    Ok(ScanFit {
        window,
        points_used: points.len(),
        weighting,
        r_min: fit.r_min,
        e_min: fit.e_min,
        fit,
        uncertainty,
    })
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from("R,E_est,E_exact,std_error\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.r, r.e_est, r.e_exact, r.std_error));
    }
    s
}

/// Shot cost of one objective evaluation for one Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianReport {
    pub label: String,
    pub n_qubits: usize,
    pub terms: usize,
    pub max_abs_coefficient: f64,
    pub shots_per_term: Vec<(String, u64)>,
    pub shots_per_evaluation: u64,
}

impl HamiltonianReport {
    fn new(label: String, h: &PauliHamiltonian, policy: ShotPolicy) -> Self {
        let (per_term, total) = policy.shot_budget(h);
        Self {
            label,
            n_qubits: h.n_qubits(),
            terms: h.len(),
            max_abs_coefficient: h.max_abs_coefficient(),
            shots_per_term: h.terms().map(|(_, p)| p.to_string()).zip(per_term).collect(),
            shots_per_evaluation: total,
        }
    }
}

/// Result of a dry run: what would be executed and what it would cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub mode: RunMode,
    pub policy: ShotPolicy,
    pub n_qubits: usize,
    pub parameter_count: usize,
    pub hamiltonians: Vec<HamiltonianReport>,
}

impl ValidationReport {
    pub fn total_shots_per_evaluation(&self) -> u64 {
        self.hamiltonians.iter().map(|h| h.shots_per_evaluation).sum()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        writeln!(f, "policy: {}", String::from(self.policy))?;
        writeln!(f, "qubits: {}", self.n_qubits)?;
        writeln!(f, "parameters: {}", self.parameter_count)?;
        for h in &self.hamiltonians {
            writeln!(
                f,
                "{}: {} terms, max |h| = {}, shots per evaluation: {}",
                h.label, h.terms, h.max_abs_coefficient, h.shots_per_evaluation
            )?;
            for (label, shots) in &h.shots_per_term {
                writeln!(f, "  {label} {shots}")?;
            }
        }
        Ok(())
    }
}

enum Prepared {
    Single {
        hamiltonian: PauliHamiltonian,
        ansatz: AnsatzSpec,
    },
    Scan {
        input: ScanInput,
        ansatz: AnsatzSpec,
    },
    Ucc {
        hamiltonian: PauliHamiltonian,
        ansatz: UccAnsatz,
    },
}

fn check_qubits(cfg: &RunConfig, found: usize) -> Result<()> {
    match cfg.n_qubits {
        Some(expected) if expected != found => Err(Error::QubitMismatch { expected, found }),
        _ => Ok(()),
    }
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.check()?;
    let prepared = match cfg.mode {
        RunMode::Vqe | RunMode::Folded => {
            let hamiltonian = load_hamiltonian(cfg.hamiltonian.as_deref().expect("checked"))?;
            check_qubits(cfg, hamiltonian.n_qubits())?;
            let ansatz = AnsatzSpec::new(hamiltonian.n_qubits(), cfg.layers)?;
            Prepared::Single { hamiltonian, ansatz }
        }
        RunMode::Scan => {
            let input = ScanInput::load(cfg.scan.as_deref().expect("checked"))?;
            check_qubits(cfg, input.n_qubits())?;
            let ansatz = AnsatzSpec::new(input.n_qubits(), cfg.layers)?;
            let used = input
                .points
                .iter()
                .filter(|p| cfg.fit_window.is_none_or(|[lo, hi]| p.r >= lo && p.r <= hi))
                .count();
            if used < 4 {
                return Err(Error::Config(format!(
                    "fit window holds {used} scan points; at least 4 are needed"
                )));
            }
            Prepared::Scan { input, ansatz }
        }
        RunMode::Ucc => {
            let hamiltonian = match (&cfg.integrals, &cfg.hamiltonian) {
                (Some(path), _) => {
                    let ints = load_integrals(path)?;
                    jordan_wigner(&build_molecular_hamiltonian(&ints)?)?.to_hamiltonian()?
                }
                (None, Some(path)) => load_hamiltonian(path)?,
                (None, None) => unreachable!("checked"),
            };
            check_qubits(cfg, hamiltonian.n_qubits())?;
            let reference = cfg.reference.as_deref().expect("checked");
            let ansatz = UccAnsatz::from_reference(hamiltonian.n_qubits(), reference, cfg.excitation_level)?;
            Prepared::Ucc { hamiltonian, ansatz }
        }
    };
    if let Some(x) = &cfg.initial {
        let expected = match &prepared {
            Prepared::Single { ansatz, .. } | Prepared::Scan { ansatz, .. } => ansatz.parameter_count(),
            Prepared::Ucc { ansatz, .. } => ansatz.parameter_count(),
        };
        if x.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: x.len(),
            });
        }
    }
    Ok(prepared)
}

/// Parses every input and reports sizes and shot cost without running.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let prepared = prepare(cfg)?;
    let (n_qubits, parameter_count, hamiltonians) = match &prepared {
        Prepared::Single { hamiltonian, ansatz } => {
            let label = cfg.hamiltonian.as_ref().expect("checked").display().to_string();
            (
                ansatz.n_qubits(),
                ansatz.parameter_count(),
                vec![HamiltonianReport::new(label, hamiltonian, cfg.policy)],
            )
        }
        Prepared::Scan { input, ansatz } => (
            ansatz.n_qubits(),
            ansatz.parameter_count(),
            input
                .points
                .iter()
                .map(|p| HamiltonianReport::new(format!("R = {}", p.r), &p.hamiltonian, cfg.policy))
                .collect(),
        ),
        Prepared::Ucc { hamiltonian, ansatz } => {
            let label = cfg
                .integrals
                .as_ref()
                .or(cfg.hamiltonian.as_ref())
                .expect("checked")
                .display()
                .to_string();
            (
                ansatz.n_qubits(),
                ansatz.parameter_count(),
                vec![HamiltonianReport::new(label, hamiltonian, cfg.policy)],
            )
        }
    };
    Ok(ValidationReport {
        mode: cfg.mode,
        policy: cfg.policy,
        n_qubits,
        parameter_count,
        hamiltonians,
    })
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::Io {
        path: tmp.display().to_string(),
        source: e,
    })?;
    fs::rename(&tmp, path).map_err(io)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    write_atomic(path, &s)
}

fn write_result(dir: &Path, result: &VqeResult) -> Result<()> {
    write_atomic(&dir.join("trace.csv"), &result.trace.to_csv())?;
    write_json(&dir.join("summary.json"), &result.summary())
}

#[derive(Serialize)]
struct FoldedSummary<'a> {
    lambda: f64,
    recovered_eigenvalue: f64,
    eigenvalue_estimate: f64,
    eigenvalue_std_error: f64,
    residual: f64,
    run: &'a VqeSummary,
}

impl<'a> FoldedSummary<'a> {
    fn new(f: &FoldedResult, run: &'a VqeSummary) -> Self {
        Self {
            lambda: f.lambda,
            recovered_eigenvalue: f.recovered_eigenvalue,
            eigenvalue_estimate: f.eigenvalue_estimate.value,
            eigenvalue_std_error: f.eigenvalue_estimate.std_error,
            residual: f.residual,
            run,
        }
    }
}

#[derive(Serialize)]
struct UccSummary<'a> {
    reference: &'a str,
    reference_energy: f64,
    excitations: usize,
    run: VqeSummary,
}

/// What a completed run produced.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Vqe(VqeResult),
    Folded(Vec<FoldedResult>),
    Scan(ScanOutcome),
    Ucc(VqeResult),
}

/// Executes the configured experiment and writes its artifacts to `out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let prepared = prepare(cfg)?;
    let out = cfg
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("an output directory is required (set `out` or pass --out)".into()))?;
    let seed = cfg.seed()?;
    let settings = cfg.settings(seed);
    write_atomic(&out.join("config.json"), &cfg.to_json())?;

    match prepared {
        Prepared::Single { hamiltonian, ansatz } if cfg.mode == RunMode::Vqe => {
            let result = run_vqe(&hamiltonian, &ansatz, &settings)?;
            write_result(out, &result)?;
            Ok(RunOutput::Vqe(result))
        }
        Prepared::Single { hamiltonian, ansatz } => {
            let results: Vec<FoldedResult> = cfg
                .lambda
                .par_iter()
                .enumerate()
                .map(|(i, &lambda)| {
                    let mut s = settings.clone();
                    s.seed = derive_seed(seed, i as u64);
                    run_folded(&hamiltonian, lambda, &ansatz, &s)
                })
                .collect::<Result<_>>()?;
            let mut index = Vec::with_capacity(results.len());
            for (i, f) in results.iter().enumerate() {
                let dir = out.join(format!("folded_{i}"));
                let summary = f.result.summary();
                write_atomic(&dir.join("trace.csv"), &f.result.trace.to_csv())?;
                write_json(&dir.join("summary.json"), &FoldedSummary::new(f, &summary))?;
                index.push(serde_json::json!({
                    "lambda": f.lambda,
                    "recovered_eigenvalue": f.recovered_eigenvalue,
                    "residual": f.residual,
                    "dir": format!("folded_{i}"),
                }));
            }
            write_json(&out.join("summary.json"), &index)?;
            Ok(RunOutput::Folded(results))
        }
        Prepared::Scan { input, ansatz } => {
            let outcome = run_scan(&input, &ansatz, &settings, cfg.fit_window, cfg.mc_samples)?;
            for (i, result) in outcome.results.iter().enumerate() {
                write_result(&out.join("points").join(format!("point_{i}")), result)?;
            }
            write_atomic(&out.join("curve.csv"), &curve_csv(&outcome.rows))?;
            write_json(&out.join("fit.json"), &outcome.fit)?;
            Ok(RunOutput::Scan(outcome))
        }
        Prepared::Ucc { hamiltonian, ansatz } => {
            let result = ucc_vqe(&hamiltonian, &ansatz, &settings)?;
            write_atomic(&out.join("trace.csv"), &result.trace.to_csv())?;
            let summary = UccSummary {
                reference: ansatz.reference(),
                reference_energy: ansatz.reference_state().exact_energy(&hamiltonian)?,
                excitations: ansatz.excitations().len(),
                run: result.summary(),
            };
            write_json(&out.join("summary.json"), &summary)?;
            Ok(RunOutput::Ucc(result))
        }
    }
}
