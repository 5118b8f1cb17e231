use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vqe_core::runner::{self, RunConfig, RunMode, RunOutput};
use vqe_core::{Error, Result, ShotPolicy, VqeResult};

#[derive(Parser)]
#[command(name = "vqe", version, about = "Variational eigensolver on a simulated register")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run(Overrides),
    /// Parse all inputs and report sizes and shot cost without running.
    Validate {
        #[command(flatten)]
        overrides: Overrides,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Vqe,
    Folded,
    Scan,
    Ucc,
}

impl From<Mode> for RunMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Vqe => RunMode::Vqe,
            Mode::Folded => RunMode::Folded,
            Mode::Scan => RunMode::Scan,
            Mode::Ucc => RunMode::Ucc,
        }
    }
}

/// Flags override the corresponding fields of `--config`.
#[derive(Args)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Pauli-sum file, one `<coefficient> <label>` per line.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Scan file: JSON list of {"R": r, "terms": [[coefficient, label], ...]}.
    #[arg(long)]
    scan: Option<PathBuf>,
    /// Integrals file for UCC runs.
    #[arg(long)]
    integrals: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed shots per term.
    #[arg(long, group = "policy")]
    shots: Option<u64>,
    /// Target precision per term; shots = ceil(h^2 / p^2).
    #[arg(long, group = "policy")]
    precision: Option<f64>,
    /// Noiseless expectation values.
    #[arg(long, group = "policy")]
    exact: bool,
    #[arg(long)]
    layers: Option<usize>,
    /// UCC reference occupation, e.g. 1100.
    #[arg(long)]
    reference: Option<String>,
    /// Folded-spectrum shifts.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Option<Vec<f64>>,
    /// Scan fit window as lo,hi.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    fit_window: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, self.mode) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(mode)) => RunConfig::new(mode.into()),
            (None, None) => return Err(Error::Config("either --config or --mode is required".into())),
        };
        if let Some(mode) = self.mode {
            cfg.mode = mode.into();
        }
        if self.hamiltonian.is_some() {
            cfg.hamiltonian = self.hamiltonian;
        }
        if self.scan.is_some() {
            cfg.scan = self.scan;
        }
        if self.integrals.is_some() {
            cfg.integrals = self.integrals;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if let Some(s) = self.shots {
            cfg.policy = ShotPolicy::FixedShots(s);
        }
        if let Some(p) = self.precision {
            cfg.policy = ShotPolicy::Precision(p);
        }
        if self.exact {
            cfg.policy = ShotPolicy::Exact;
        }
        if let Some(l) = self.layers {
            cfg.layers = l;
        }
        if self.reference.is_some() {
            cfg.reference = self.reference;
        }
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(w) = self.fit_window {
            let [lo, hi] = w[..] else {
                return Err(Error::Config(format!(
                    "--fit-window takes two values lo,hi, got {}",
                    w.len()
                )));
            };
            cfg.fit_window = Some([lo, hi]);
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        Ok(cfg)
    }
}

fn describe(r: &VqeResult) -> String {
    let mut s = format!(
        "energy {} +/- {} (exact {}), {} evaluations, {} restarts, stop: {:?}",
        r.final_estimate.value,
        r.final_estimate.std_error,
        r.final_exact_energy,
        r.trace.evaluations,
        r.trace.restarts,
        r.reason
    );
    if let Some(g) = r.ground_energy {
        s.push_str(&format!(", ground {g}"));
    }
    s
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Validate { overrides, json } => {
            let report = runner::validate(&overrides.into_config()?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{report}");
            }
        }
        Command::Run(overrides) => match runner::run(&overrides.into_config()?)? {
            RunOutput::Vqe(r) | RunOutput::Ucc(r) => println!("{}", describe(&r)),
            RunOutput::Folded(results) => {
                for f in &results {
                    println!(
                        "lambda {}: eigenvalue {} (residual {:e}); {}",
                        f.lambda,
                        f.recovered_eigenvalue,
                        f.residual,
                        describe(&f.result)
                    );
                }
            }
            RunOutput::Scan(outcome) => {
                let fit = &outcome.fit;
                match (fit.r_min, fit.e_min, &fit.uncertainty) {
                    (Some(r), Some(e), Some(u)) => println!(
                        "R_min {r} +/- {}, E_min {e} +/- {} ({} points fitted{})",
                        u.sigma_r_min,
                        u.sigma_e_min,
                        fit.points_used,
                        if u.warning { "; many Monte-Carlo samples discarded" } else { "" }
                    ),
                    _ => println!("fitted parabola has no minimum ({} points)", fit.points_used),
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error ({}): {e}", category.name());
            ExitCode::from(category.exit_code() as u8)
        }
    }
}
