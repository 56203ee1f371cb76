//! `streampca generate | run | compare`.
//!
//! Exit codes: 0 when every requested run completed, 1 on a runtime failure,
//! 2 on a usage error (bad flag, unknown method, `k > d`, ...).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bench::{
    eta_grid, prepare_experiment, run_method, write_trajectories, Clock, EtaChoice, Experiment, MethodRun, Trajectory,
};
use crate::data::{
    generate_orthogonal, geometric_spectrum, load_csv, save_csv, Dataset, Provenance, DEFAULT_FRACTIONS,
};
use crate::solvers::{LearningRate, Method, SolverConfig};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "streampca", version, about = "Streaming PCA solvers and benchmark runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset CSV and its metadata sidecar.
    Generate(GenerateArgs),
    /// Tune and run one or more methods, one trajectory CSV per method.
    Run(RunArgs),
    /// Run several methods on one shared split into a combined CSV.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SyntheticArgs {
    /// Number of samples.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Ambient dimension.
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    /// Ratio between consecutive mixing probabilities.
    #[arg(long = "spectrum-decay", default_value_t = 0.8)]
    pub spectrum_decay: f64,
    /// Sample magnitude multiplier.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Seed for generation, the split and solver initialization.
    #[arg(long, env = "STREAMPCA_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Omit the `x0,x1,...` header line.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    /// Load samples from this CSV instead of generating them.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// The CSV given by --data has no header line.
    #[arg(long)]
    pub no_header: bool,
    /// Target rank.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Rank cap for capped_msg [default: k + 1].
    #[arg(long)]
    pub cap: Option<usize>,
    /// Fixed base step size η₀ of the η₀/√t schedule [default: tuned over 2^-6 .. 2^2].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Samples consumed per run [default: one pass over the training split].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Steps between probes [default: ceil(iters / 500)].
    #[arg(long)]
    pub cadence: Option<usize>,
    /// `wall` records solver time; `off` writes zeros for byte-reproducible output.
    #[arg(long, default_value = "wall")]
    pub clock: Clock,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Method(s): batch, incremental, power, msg, capped_msg.
    #[arg(long, value_delimiter = ',', required = true)]
    pub method: Vec<Method>,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Methods to compare.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "batch,incremental,power,msg,capped_msg"
    )]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_FAILURE,
        }
    }
}

/// Parses `args` (program name first), dispatches, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Serialize)]
struct DatasetMeta {
    n: usize,
    d: usize,
    seed: u64,
    spectrum_decay: f64,
    spectrum: Vec<f64>,
    scale: f64,
    /// SHA-256 of the basis, column-major little-endian f64.
    basis_sha256: String,
}

fn synthesize(args: &SyntheticArgs) -> Result<Dataset, CliError> {
    if args.n == 0 || args.d == 0 {
        return Err(CliError::Usage("--n and --d must be positive".into()));
    }
    let spectrum = geometric_spectrum(args.d, args.spectrum_decay).map_err(|e| CliError::Usage(e.to_string()))?;
    if !args.scale.is_finite() || args.scale <= 0.0 {
        return Err(CliError::Usage(format!("--scale must be positive, got {}", args.scale)));
    }
    Ok(generate_orthogonal(args.n, args.d, &spectrum, args.scale, args.seed)?)
}

fn basis_hash(basis: &ndarray::Array2<f64>) -> String {
    let mut h = Sha256::new();
    for col in basis.columns() {
        for v in col {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Writes `<out>/dataset.csv` and `<out>/dataset.meta.json`.
pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let data = synthesize(&args.synthetic)?;
    fs::create_dir_all(&args.out).map_err(Error::from)?;
    let csv_path = args.out.join("dataset.csv");
    save_csv(&data, &csv_path, !args.no_header)?;
    let Provenance::Synthetic { spectrum, basis, .. } = &data.provenance else {
        unreachable!("generator output is synthetic")
    };
    let meta = DatasetMeta {
        n: data.n(),
        d: data.dim(),
        seed: args.synthetic.seed,
        spectrum_decay: args.synthetic.spectrum_decay,
        spectrum: spectrum.clone(),
        scale: args.synthetic.scale,
        basis_sha256: basis_hash(basis),
    };
    write_json(&args.out.join("dataset.meta.json"), &meta)?;
    println!("wrote {} ({} x {})", csv_path.display(), data.n(), data.dim());
    Ok(())
}

/// A validated experiment ready to run.
pub struct Prepared {
    pub experiment: Experiment,
    pub config: SolverConfig,
    pub eta: EtaChoice,
    pub source: String,
}

pub fn prepare(args: &ExperimentArgs) -> Result<Prepared, CliError> {
    let data = match &args.data {
        Some(path) => load_csv(path, !args.no_header)?,
        None => synthesize(&args.synthetic)?,
    };
    let d = data.dim();
    if args.k == 0 || args.k > d {
        return Err(CliError::Usage(format!("--k must be in 1..={d}, got {}", args.k)));
    }
    if let Some(cap) = args.cap {
        if cap < args.k {
            return Err(CliError::Usage(format!("--cap {cap} is below --k {}", args.k)));
        }
    }
    let eta = match args.eta {
        Some(e) if !e.is_finite() || e <= 0.0 => {
            return Err(CliError::Usage(format!("--eta must be positive, got {e}")));
        }
        Some(e) => EtaChoice::Fixed(e),
        None => EtaChoice::Grid(eta_grid()),
    };
    if args.cadence == Some(0) || args.iters == Some(0) {
        return Err(CliError::Usage("--iters and --cadence must be positive".into()));
    }
    let seed = args.synthetic.seed;
    let experiment = prepare_experiment(&data, DEFAULT_FRACTIONS, args.k, seed)
        .map_err(|e| CliError::Usage(format!("cannot split the dataset: {e}")))?;
    let mut config = SolverConfig::new(args.k, args.iters.unwrap_or(experiment.train.n()));
    config.cap = args.cap;
    config.learning_rate = LearningRate::InvSqrt(1.0);
    config.seed = seed;
    config.cadence = args.cadence;
    config.clock = args.clock;
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let source = match &args.data {
        Some(p) => p.display().to_string(),
        None => "synthetic".to_owned(),
    };
    Ok(Prepared {
        experiment,
        config,
        eta,
        source,
    })
}

#[derive(Serialize)]
struct Manifest<'a, A: Serialize> {
    command: &'a str,
    version: &'a str,
    args: &'a A,
    source: &'a str,
    n_train: usize,
    n_tune: usize,
    n_test: usize,
    split_fractions: [f64; 3],
    reference_objective: f64,
    config: &'a SolverConfig,
    cadence: usize,
    cap: usize,
    eta_grid: Vec<f64>,
    runs: Vec<&'a MethodRun>,
    failures: Vec<(Method, String)>,
}

struct Outcome {
    runs: Vec<MethodRun>,
    failures: Vec<(Method, String)>,
}

fn run_all(prep: &Prepared, methods: &[Method]) -> Outcome {
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &method in methods {
        match run_method(method, &prep.experiment, &prep.config, &prep.eta) {
            Ok(run) => {
                let last = run.trajectory.last().expect("every run records at least once");
                let eta = run.eta0.map_or_else(|| "-".to_owned(), |e| e.to_string());
                println!(
                    "{:<12} eta0={eta:<10} objective={:.6} suboptimality={:.6e} rank={}",
                    method.as_str(),
                    last.objective,
                    last.suboptimality,
                    last.rank
                );
                runs.push(run);
            }
            Err(e) => {
                eprintln!("error: {method} failed: {e}");
                failures.push((method, e.to_string()));
            }
        }
    }
    Outcome { runs, failures }
}

fn write_manifest<A: Serialize>(
    command: &str,
    args: &A,
    prep: &Prepared,
    outcome: &Outcome,
    out: &Path,
) -> Result<(), Error> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        args,
        source: &prep.source,
        n_train: prep.experiment.train.n(),
        n_tune: prep.experiment.tune.n(),
        n_test: prep.experiment.test.n(),
        split_fractions: DEFAULT_FRACTIONS,
        reference_objective: prep.experiment.reference.value,
        config: &prep.config,
        cadence: prep.config.cadence(),
        cap: prep.config.cap(),
        eta_grid: match &prep.eta {
            EtaChoice::Grid(g) => g.clone(),
            EtaChoice::Fixed(e) => vec![*e],
        },
        runs: outcome.runs.iter().collect(),
        failures: outcome.failures.clone(),
    };
    write_json(&out.join("manifest.json"), &manifest)
}

fn finish(outcome: &Outcome) -> Result<(), CliError> {
    if outcome.failures.is_empty() {
        return Ok(());
    }
    let names: Vec<&str> = outcome.failures.iter().map(|(m, _)| m.as_str()).collect();
    Err(CliError::Runtime(Error::invalid(format!(
        "failed methods: {}",
        names.join(", ")
    ))))
}

fn write_trajectory_file(path: &Path, runs: &[(Method, &Trajectory)]) -> Result<(), Error> {
    let mut out = BufWriter::new(File::create(path)?);
    write_trajectories(&mut out, runs)?;
    out.flush()?;
    Ok(())
}

/// Writes `<out>/<method>.csv` per method and `<out>/manifest.json`.
pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let prep = prepare(&args.experiment)?;
    let out = &args.experiment.out;
    fs::create_dir_all(out).map_err(Error::from)?;
    let outcome = run_all(&prep, &args.method);
    for run in &outcome.runs {
        write_trajectory_file(
            &out.join(format!("{}.csv", run.method)),
            &[(run.method, &run.trajectory)],
        )?;
    }
    write_manifest("run", args, &prep, &outcome, out)?;
    finish(&outcome)
}

/// Writes `<out>/compare.csv` with one block per method and
/// `<out>/manifest.json`. Every method consumes the same sample order.
pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let prep = prepare(&args.experiment)?;
    let out = &args.experiment.out;
    fs::create_dir_all(out).map_err(Error::from)?;
    let outcome = run_all(&prep, &args.methods);
    let blocks: Vec<(Method, &Trajectory)> = outcome.runs.iter().map(|r| (r.method, &r.trajectory)).collect();
    write_trajectory_file(&out.join("compare.csv"), &blocks)?;
    write_manifest("compare", args, &prep, &outcome, out)?;
    finish(&outcome)
}
