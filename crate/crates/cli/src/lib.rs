//! Front end for the Helmholtz-condition checker: problem files in, verdict
//! reports and trajectories out.

pub mod commands;
pub mod problem;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use helmholtz_core::expr::{ZeroTester, DEFAULT_PROBES, DEFAULT_TOL};

use crate::commands::Outcome;
use crate::problem::Problem;
use crate::report::{ProbeStatistics, ReportDocument, Status};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct InputError {
    pub message: String,
}

impl InputError {
    pub fn new(message: impl Into<String>) -> InputError {
        InputError { message: message.into() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "helmholtz", version, about = "Helmholtz conditions for time-dependent semisprays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for probe points and random operands [default: file value, then 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Probe points per zero test [default: file value, then 32]
    #[arg(long, global = true)]
    pub probes: Option<usize>,
    /// Relative tolerance of a zero test [default: file value, then 1e-9]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the JSON report document here
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// No symbolic metric inversion and no canonical-form proofs
    #[arg(long, global = true)]
    pub numeric_only: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Test the Helmholtz conditions for (G, theta)
    Check { file: PathBuf },
    /// Derive G from L, then check its Poincare-Cartan form
    FromLagrangian { file: PathBuf },
    /// Integrate the paths of the semispray and write CSV
    Geodesics {
        file: PathBuf,
        /// CSV destination; standard output when omitted
        output: Option<PathBuf>,
    },
    /// Evaluate the structural identities for G
    Identities { file: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::FromLagrangian { .. } => "from-lagrangian",
            Command::Geodesics { .. } => "geodesics",
            Command::Identities { .. } => "identities",
        }
    }

    fn file(&self) -> &PathBuf {
        match self {
            Command::Check { file } | Command::FromLagrangian { file } | Command::Identities { file } => file,
            Command::Geodesics { file, .. } => file,
        }
    }
}

/// Effective probing parameters after flags override the problem file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub probes: usize,
    pub tol: f64,
    pub numeric_only: bool,
}

impl Settings {
    pub fn resolve(cli: &Cli, problem: Option<&Problem>) -> Settings {
        Settings {
            seed: cli.seed.or(problem.and_then(|p| p.seed)).unwrap_or(0),
            probes: cli.probes.or(problem.and_then(|p| p.probes)).unwrap_or(DEFAULT_PROBES),
            tol: cli.tol.or(problem.and_then(|p| p.tol)).unwrap_or(DEFAULT_TOL),
            numeric_only: cli.numeric_only,
        }
    }

    pub fn tester(&self, n: usize) -> ZeroTester {
        ZeroTester::new(n, self.probes, self.tol, self.seed).probe_only(self.numeric_only)
    }

    fn validate(&self) -> Result<(), InputError> {
        if self.probes == 0 {
            return Err(InputError::new("--probes must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(InputError::new(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Result of one invocation. Files named by the command line have already
/// been written.
#[derive(Debug, Clone)]
pub struct Execution {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub document: ReportDocument,
}

fn dispatch(cli: &Cli, problem: &Problem, settings: &Settings) -> Result<Outcome, InputError> {
    settings.validate()?;
    match &cli.command {
        Command::Check { .. } => commands::check(problem, settings),
        Command::FromLagrangian { .. } => commands::from_lagrangian(problem, settings),
        Command::Geodesics { .. } => commands::geodesics(problem, settings),
        Command::Identities { .. } => commands::identities(problem, settings),
    }
}

pub fn execute(cli: &Cli) -> Execution {
    let loaded = Problem::load(cli.command.file());
    let settings = Settings::resolve(cli, loaded.as_ref().ok());
    let outcome = loaded.and_then(|p| dispatch(cli, &p, &settings));
    let (mut stdout, mut stderr) = (String::new(), String::new());
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => Outcome {
            status: Status::InputError,
            message: Some(e.message.clone()),
            result: serde_json::Value::Null,
            text: String::new(),
            csv: None,
        },
    };
    if let Some(csv) = &outcome.csv {
        match &cli.command {
            Command::Geodesics { output: Some(path), .. } => {
                if let Err(e) = std::fs::write(path, csv) {
                    stderr.push_str(&format!("error: cannot write {}: {e}\n", path.display()));
                }
            }
            _ => stdout.push_str(csv),
        }
    }
    // CSV on standard output pushes the summary to standard error.
    let summary = if matches!(cli.command, Command::Geodesics { output: None, .. }) { &mut stderr } else { &mut stdout };
    summary.push_str(&outcome.text);
    if outcome.status == Status::InputError {
        stderr.push_str(&format!("error: {}\n", outcome.message.as_deref().unwrap_or("invalid input")));
    }
    let document = ReportDocument {
        tool: "helmholtz",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        seed: settings.seed,
        probes: settings.probes,
        tol: settings.tol,
        numeric_only: settings.numeric_only,
        status: outcome.status,
        exit_code: outcome.status.exit_code(),
        message: outcome.message.clone(),
        probe_statistics: ProbeStatistics::collect(settings.probes, &outcome.result),
        result: outcome.result,
    };
    let mut exit_code = document.exit_code;
    if let Some(path) = &cli.json {
        if let Err(e) = std::fs::write(path, document.to_json()) {
            stderr.push_str(&format!("error: cannot write {}: {e}\n", path.display()));
            exit_code = Status::InputError.exit_code();
        }
    }
    Execution { exit_code, stdout, stderr, document }
}
