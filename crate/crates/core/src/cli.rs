//! Command-line front end: `run`, `check` and `scenario`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dsl::{execute, parse_circuit_with, to_canonical_json, ExecOptions, RunReport};
use crate::error::{Error, Result};
use crate::operator::Tolerance;
use crate::scenarios::{run_billiard_demo, run_chsh, run_epr, run_measurement, run_undo, ScenarioReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable that overrides the default tolerance.
pub const TOL_ENV: &str = "DESCRIPTOR_TOL";

#[derive(Debug, Parser)]
#[command(name = "descnet", version, about = "Descriptor-picture qubit network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a circuit file and report.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: RunArgs,
        /// Skip the state-vector cross-check.
        #[arg(long)]
        no_oracle: bool,
        /// Skip the per-step invariant suite.
        #[arg(long)]
        no_suite: bool,
    },
    /// Run the invariant suite only; exit 1 on any failure.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: RunArgs,
    },
    /// Run a built-in experiment.
    Scenario {
        name: ScenarioName,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Absolute tolerance (overrides DESCRIPTOR_TOL).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    Epr,
    Measurement,
    Undo,
    Chsh,
    Billiard,
}

impl ScenarioName {
    pub fn run(self) -> ScenarioReport {
        match self {
            ScenarioName::Epr => run_epr(),
            ScenarioName::Measurement => run_measurement(),
            ScenarioName::Undo => run_undo(),
            ScenarioName::Chsh => run_chsh(),
            ScenarioName::Billiard => run_billiard_demo(),
        }
    }
}

fn resolve_tol(flag: Option<f64>, env: Option<String>) -> Result<Tolerance> {
    match (flag, env) {
        (Some(eps), _) => Tolerance::new(eps),
        (None, Some(s)) => {
            let eps: f64 = s.trim().parse().map_err(|_| Error::InvalidArg(format!("{TOL_ENV}={s:?} is not a number")))?;
            Tolerance::new(eps)
        }
        (None, None) => Ok(Tolerance::default()),
    }
}

enum Outcome {
    Done(bool),
    Usage(Error),
    Runtime(Error),
}

fn load_and_run(file: &Path, common: &RunArgs, oracle: bool, suite: bool) -> Outcome {
    let tol = match resolve_tol(common.tol, std::env::var(TOL_ENV).ok()) {
        Ok(t) => t,
        Err(e) => return Outcome::Usage(e),
    };
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return Outcome::Usage(Error::InvalidArg(format!("{}: {e}", file.display()))),
    };
    let program = match parse_circuit_with(&text, tol) {
        Ok(p) => p,
        Err(e) => return Outcome::Usage(Error::Parse(e)),
    };
    let report = match execute(&program, ExecOptions { tol, oracle, suite }) {
        Ok(r) => r,
        Err(e) => return Outcome::Runtime(e),
    };
    emit_run(&report, common.json.as_deref())
}

fn emit_run(report: &RunReport, json: Option<&Path>) -> Outcome {
    match json {
        Some(path) => {
            if let Err(e) = report.to_json().map_err(Error::from).and_then(|s| Ok(std::fs::write(path, s)?)) {
                return Outcome::Usage(e);
            }
        }
        None => print!("{}", report.render()),
    }
    Outcome::Done(report.pass())
}

fn render_scenario(report: &ScenarioReport) -> String {
    let mut out = format!("scenario {}\n", report.name);
    for c in &report.checks {
        let tag = if c.pass { "ok  " } else { "FAIL" };
        out.push_str(&format!("  {tag} {}: expected {} got {} (tol {:e})\n", c.label, c.expected, c.actual, c.tolerance));
    }
    for (name, rows) in &report.artifacts {
        out.push_str(&format!("  {name}: {rows:?}\n"));
    }
    let s = &report.summary;
    out.push_str(&format!("{}: {} checks, {} failed\n", if s.pass { "PASS" } else { "FAIL" }, s.n_checks, s.n_failed));
    out
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Run { file, common, no_oracle, no_suite } => load_and_run(&file, &common, !no_oracle, !no_suite),
        Command::Check { file, common } => load_and_run(&file, &common, true, true),
        Command::Scenario { name, json } => {
            let report = name.run();
            match json {
                Some(path) => {
                    if let Err(e) = to_canonical_json(&report).map_err(Error::from).and_then(|s| Ok(std::fs::write(&path, s)?)) {
                        return Outcome::Usage(e);
                    }
                }
                None => print!("{}", render_scenario(&report)),
            }
            Outcome::Done(report.pass())
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Outcome::Done(true) => EXIT_PASS,
        Outcome::Done(false) => EXIT_FAIL,
        Outcome::Usage(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Outcome::Runtime(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}
