use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use mot_nll::baselines::{theorem1_sweep, verify_theorem1, Theorem1Construction};
use mot_nll::densities::StateVector;
use mot_nll::report::{emit_report, score_scenario, ReportFormat};
use mot_nll::scenario::{generate_random_scenario, read_scenario, serialize_scenario, ScenarioLimits};
use mot_nll::scoring::{GroundTruthSet, NllConfig, DEFAULT_Q};
use mot_nll::Error;

/// Score multi-object tracking posteriors by negative log-likelihood.
#[derive(Parser)]
#[command(name = "mot-nll", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Score every tracker of a scenario.
    Score {
        #[arg(long)]
        scenario: PathBuf,
        /// Number of best assignments per hypothesis.
        #[arg(long, default_value_t = DEFAULT_Q)]
        q: usize,
        /// Use exhaustive enumeration where the instance is small enough.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score with exhaustive enumeration only; fails on instances that are too large.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the NLL/GOSPA identity on random constructions.
    Theorem1 {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        volume: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Also evaluate a fixed construction read from this file.
        #[arg(long)]
        construction: Option<PathBuf>,
    },
    /// Write a random scenario.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_objects: usize,
        #[arg(long, default_value_t = 5)]
        max_bernoullis: usize,
        #[arg(long, default_value_t = 3)]
        max_hypotheses: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ConstructionDoc {
    rho: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    centers: Vec<Vec<f64>>,
    ground_truth: Vec<Vec<f64>>,
}

enum Failure {
    Score(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Score(e)
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_construction(path: &Path) -> Result<String, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation { path: path.display().to_string(), message: e.to_string() })?;
    let doc: ConstructionDoc = serde_path_to_error::deserialize(&mut serde_json::Deserializer::from_str(&text))
        .map_err(|e| Error::Validation { path: e.path().to_string(), message: e.into_inner().to_string() })?;
    let dim = doc.lower.len();
    let centers = doc
        .centers
        .into_iter()
        .map(StateVector::new)
        .collect::<Result<Vec<_>, _>>()?;
    let t = Theorem1Construction::new(doc.rho, doc.lower, doc.upper, centers)?;
    let y = GroundTruthSet::from_points(dim, &doc.ground_truth)?;
    let check = verify_theorem1(&t, &y)?;
    Ok(format!(
        "construction {}: lhs = {}, rhs = {}, |lhs - rhs| = {:e}, GOSPA part = {}\n",
        path.display(),
        check.lhs,
        check.rhs,
        check.gap(),
        check.gospa_part
    ))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Score { scenario, q, exact, format, out } => {
            let s = read_scenario(&scenario)?;
            let config = NllConfig { q, prefer_exact: exact, require_exact: false };
            let report = score_scenario(&s, config)?;
            write_output(out.as_deref(), &emit_report(&report, format.into()))
        }
        Command::Oracle { scenario, format, out } => {
            let s = read_scenario(&scenario)?;
            let config = NllConfig { q: DEFAULT_Q, prefer_exact: true, require_exact: true };
            let report = score_scenario(&s, config)?;
            write_output(out.as_deref(), &emit_report(&report, format.into()))
        }
        Command::Theorem1 { rho, volume, dim, seed, trials, construction } => {
            let mut text = String::new();
            if let Some(path) = construction {
                text.push_str(&run_construction(&path)?);
            }
            let sweep = theorem1_sweep(rho, volume, dim, seed, trials)?;
            text.push_str(&format!(
                "trials: {}\nmax |lhs - rhs|: {:e}\nmedian |lhs - rhs|: {:e}\nperturbed-existence median |lhs - rhs|: {:e}\n",
                sweep.trials, sweep.max_gap, sweep.median_gap, sweep.perturbed_median_gap
            ));
            write_output(None, &text)
        }
        Command::Gen { seed, max_objects, max_bernoullis, max_hypotheses, dim, out } => {
            let limits = ScenarioLimits {
                max_objects,
                max_bernoullis,
                max_hypotheses,
                dimension: dim,
            };
            let s = generate_random_scenario(seed, limits)?;
            let mut text = serialize_scenario(&s);
            text.push('\n');
            write_output(out.as_deref(), &text)
        }
    }
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Human => ReportFormat::Human,
            Format::Machine => ReportFormat::Machine,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Score(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.root().is_validation() { 1 } else { 2 })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
