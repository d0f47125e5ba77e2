use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use mixedchar::construction::simulate;
use mixedchar::homotaylor::{root_transfer, UnivariatePoly};
use mixedchar::mutation::{self, Mutation};
use mixedchar::rational::{serde_q, serde_q_vec, Q};
use mixedchar::ringmodel::{koszul_comparison, load_model, stabilization_check, FiniteModel};
use mixedchar::sweep::{run_sweeps, SweepConfig};
use mixedchar::Error;

#[derive(Parser)]
#[command(name = "mixedchar", version, about = "Valuation sweeps, root transfer and construction traces")]
struct Cli {
    /// Corrupt one formula on purpose (for checking that tests notice).
    #[arg(long, global = true, hide = true)]
    mutate: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the valuation identities and inequalities; exit 1 on any violation.
    VerifyLemmas {
        /// Comma-separated primes.
        #[arg(long = "p", value_delimiter = ',', default_values_t = [2u64, 3, 5])]
        primes: Vec<u64>,
        #[arg(long = "L-max", default_value_t = 4)]
        l_max: u32,
        #[arg(long = "n-max", default_value_t = 10_000)]
        n_max: u64,
        #[arg(long = "K-max", default_value_t = 4)]
        k_max: u32,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run f -> F -> g -> h on `{"f": [...], "z": .., "x": .., "y": ..}` (or `-` for stdin).
    Pipeline { input: String },
    /// Load a model file and check the ring axioms.
    ValidateModel {
        #[arg(long)]
        model: PathBuf,
    },
    /// Run the construction and write the step trace.
    Run {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "K", default_value_t = 1)]
        k: u32,
        #[arg(long = "max-steps", default_value_t = 64)]
        max_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare Koszul H_1 on (p^N, x, y) with the colon quotient.
    Koszul {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "N", default_value_t = 1)]
        n: u32,
    },
    /// Injectivity and surjectivity of Q_from -> Q_to.
    Stabilize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "N", default_value_t = 1)]
        n: u32,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
    },
}

enum Failure {
    Usage(String),
    Fail(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Fail(e.to_string()),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PolyInput {
    Coefficients(#[serde(with = "serde_q_vec")] Vec<Q>),
    Object(UnivariatePoly),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineInput {
    f: PolyInput,
    #[serde(with = "serde_q")]
    z: Q,
    #[serde(with = "serde_q")]
    x: Q,
    #[serde(with = "serde_q")]
    y: Q,
}

#[derive(Serialize)]
struct PipelineOutput {
    #[serde(rename = "F")]
    big_f: mixedchar::homotaylor::HomoPoly,
    g: UnivariatePoly,
    h: UnivariatePoly,
    verified: bool,
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_model(path: &Path) -> Result<FiniteModel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(load_model(&text)?)
}

fn pipeline(input: &str) -> Result<bool, Failure> {
    let text = if input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(e.to_string()))?;
        s
    } else {
        input.to_string()
    };
    let parsed: PipelineInput = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad input: {e}")))?;
    let f = match parsed.f {
        PolyInput::Coefficients(c) => UnivariatePoly::new(c)?,
        PolyInput::Object(p) => p,
    };
    let r = root_transfer(&f, &parsed.z, &parsed.x, &parsed.y)?;
    let verified = r.verified();
    emit(&PipelineOutput { big_f: r.big_f, g: r.g, h: r.h, verified }, None)?;
    Ok(verified)
}

fn execute(command: Command) -> Result<bool, Failure> {
    match command {
        Command::VerifyLemmas { primes, l_max, n_max, k_max, jobs, out } => {
            let cfg = SweepConfig { primes, l_max, n_max, k_max, jobs };
            let report = run_sweeps(&cfg)?;
            emit(&report, out.as_deref())?;
            Ok(report.violations == 0)
        }
        Command::Pipeline { input } => pipeline(&input),
        Command::ValidateModel { model } => {
            let m = read_model(&model)?;
            let summary = serde_json::json!({
                "valid": true,
                "p": m.p(),
                "rank": m.dim(),
                "effective_precision": m.precision(),
                "precision": m.precision_info(),
            });
            emit(&summary, None)?;
            Ok(true)
        }
        Command::Run { model, k, max_steps, out } => {
            let m = read_model(&model)?;
            let run = simulate(&m, k, max_steps);
            if let Some(path) = out.as_deref() {
                emit(&run.steps, Some(path))?;
            }
            let summary = serde_json::json!({
                "terminated": run.terminated,
                "K": run.k,
                "N_1": run.n_1,
                "steps": run.steps.len(),
                "case3_count": run.case3_count,
                "all_pass": run.steps.iter().all(|s| s.report.pass),
                "effective_precision": run.steps.iter().map(|s| s.effective_precision).min(),
                "polynomial": run.polynomial,
                "epsilon_scaled": run.epsilon_scaled,
                "error": run.error,
            });
            emit(&summary, None)?;
            if let Some(Error::InvalidArgument(msg)) = &run.failure {
                return Err(Failure::Usage(msg.clone()));
            }
            Ok(run.terminated && run.steps.iter().all(|s| s.report.pass))
        }
        Command::Koszul { model, n } => {
            let m = read_model(&model)?;
            emit(&koszul_comparison(&m, n), None)?;
            Ok(true)
        }
        Command::Stabilize { model, n, from, to } => {
            let m = read_model(&model)?;
            emit(&stabilization_check(&m, n, from, to)?, None)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(name) = &cli.mutate {
        match Mutation::from_name(name) {
            Some(m) => mutation::set_global(Some(m)),
            None => {
                eprintln!("error: unknown mutation {name:?}");
                return ExitCode::from(2);
            }
        }
    }
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Fail(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
