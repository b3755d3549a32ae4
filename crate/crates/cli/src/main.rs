use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use qcflow::hypertopology::MetricBasis;
use qcflow::io::hypertop::{self, read_basis, read_polytope};
use qcflow::io::{run_check, run_simulate, ExperimentConfig, PolynomialSpec, StateSpec, SUITES};
use qcflow::observables::{evaluate, poisson_bracket};
use qcflow::Error;

/// Environment variable holding the worker-thread count.
const WORKERS_VAR: &str = "QCFLOW_WORKERS";

#[derive(Parser)]
#[command(name = "qcflow", version, about = "Self-consistent quantum-classical flows and weak*-Hausdorff geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate an experiment and write trajectory CSVs plus diagnostics.
    Simulate { config: PathBuf },
    /// Run invariant suites and print a JSON report.
    Check {
        config: PathBuf,
        /// Suite to run (repeatable); defaults to the config's list or all suites.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
    /// Poisson bracket of two polynomial function files.
    Bracket {
        f: PathBuf,
        g: PathBuf,
        /// Also evaluate the bracket at this state, e.g. "bloch(0,0,1)".
        #[arg(long)]
        state: Option<String>,
    },
    /// Polytope geometry.
    #[command(subcommand)]
    Hypertop(Hypertop),
}

#[derive(Subcommand)]
enum Hypertop {
    /// Distances between two polytopes.
    Distance {
        a: PathBuf,
        b: PathBuf,
        /// Metric basis file; the standard basis when absent.
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Remove non-extreme points.
    Reduce {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Grow a polytope by exposed points and log every step.
    Poulsen {
        file: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        bound: f64,
        #[arg(long)]
        seed: u64,
        #[arg(short, long, default_value = "poulsen_trace.json")]
        out: PathBuf,
    },
    /// Check an increasing sequence against its limit (the last file).
    Limits {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

enum Failure {
    Validation(String),
    Solver(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. }
            | Error::StepTooLarge { .. }
            | Error::NonUnitary { .. }
            | Error::InsufficientCoverage { .. }
            | Error::Lp(_) => Failure::Solver(e.to_string()),
            Error::CertificateFailure { .. } | Error::NotIncreasing { .. } => Failure::Invariant(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|_| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn configure_workers() -> Outcome {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Validation(format!("{WORKERS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Validation(e.to_string()))
}

fn print(v: &Value) {
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn write_json(path: &Path, v: &Value) -> Outcome {
    let text = serde_json::to_string_pretty(v).expect("json value") + "\n";
    std::fs::write(path, text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn basis_or_standard(basis: Option<&Path>, dim: usize) -> Result<MetricBasis, Failure> {
    Ok(match basis {
        Some(p) => read_basis(p)?,
        None => MetricBasis::standard(dim),
    })
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Simulate { config } => {
            let exp = ExperimentConfig::from_file(&config)?.build()?;
            let files = run_simulate(&exp)?;
            print(&json!({ "written": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() }));
            Ok(())
        }
        Command::Check { config, suites } => {
            let exp = ExperimentConfig::from_file(&config)?.build()?;
            let selected = if !suites.is_empty() {
                suites
            } else {
                exp.suites.clone().unwrap_or_else(|| SUITES.iter().map(|s| s.to_string()).collect())
            };
            let report = run_check(&exp, &selected)?;
            print(&serde_json::to_value(&report).expect("report serializes"));
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Invariant(format!(
                    "{} of {} checks failed",
                    report.checks.iter().filter(|c| !c.passed).count(),
                    report.checks.len()
                )))
            }
        }
        Command::Bracket { f, g, state } => {
            let load = |p: &Path| -> Result<_, Failure> {
                let text = std::fs::read_to_string(p).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?;
                let spec: PolynomialSpec =
                    serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?;
                Ok(spec.to_function()?)
            };
            let (f, g) = (load(&f)?, load(&g)?);
            let b = poisson_bracket(&f, &g)?;
            let mut out = json!({ "bracket": PolynomialSpec::from_function(&b) });
            if let Some(text) = state {
                let rho = StateSpec::Named(text).build(b.registry().dim(), None, "--state")?;
                out["value"] = json!(evaluate(&b, &rho)?);
            }
            print(&out);
            Ok(())
        }
        Command::Hypertop(cmd) => hypertop_command(cmd),
    }
}

fn hypertop_command(cmd: Hypertop) -> Outcome {
    match cmd {
        Hypertop::Distance { a, b, basis, tol } => {
            let (k1, k2) = (read_polytope(&a)?, read_polytope(&b)?);
            let basis = basis_or_standard(basis.as_deref(), k1.dim())?;
            print(&hypertop::distance_report(&k1, &k2, &basis, tol)?);
            Ok(())
        }
        Hypertop::Reduce { file, out } => {
            let k = hypertop::reduce(&read_polytope(&file)?)?;
            match out {
                Some(p) => write_json(&p, &k.to_json()),
                None => {
                    print(&k.to_json());
                    Ok(())
                }
            }
        }
        Hypertop::Poulsen { file, epsilon, steps, bound, seed, out } => {
            let (trace, log) = hypertop::poulsen(&read_polytope(&file)?, epsilon, steps, bound, seed)?;
            write_json(&out, &log)?;
            print(&json!({
                "trace": out.display().to_string(),
                "steps": trace.steps.len(),
                "first_lambda": trace.steps.first().map(|s| s.lambda),
                "drift": log["drift"],
                "drift_bound": log["drift_bound"],
            }));
            Ok(())
        }
        Hypertop::Limits { files, basis, tol } => {
            let polys = files.iter().map(|p| read_polytope(p)).collect::<Result<Vec<_>, _>>()?;
            let (limit, sequence) = polys.split_last().expect("at least two files");
            let basis = basis_or_standard(basis.as_deref(), limit.dim())?;
            let report = hypertop::limits(sequence, limit, &basis, tol)?;
            print(&serde_json::to_value(&report).expect("report serializes"));
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Invariant("sequence does not decrease to the limit".into()))
            }
        }
    }
}
