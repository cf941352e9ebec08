//! plsim: run the toolkit's demos, experiments and audits and emit
//! machine-readable reports.
//!
//! Exit codes: 0 if every check passed, 1 on any failed check or engine
//! error, 2 on usage errors. Seeds are mandatory for every sampled
//! command; nothing ever falls back to the clock, so identical invocations
//! produce byte-identical reports.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use report::{ConfigEcho, Format, Report};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Engine(plsim::Error),
    Io(std::io::Error),
}

impl From<plsim::Error> for CliError {
    fn from(e: plsim::Error) -> Self {
        CliError::Engine(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Engine(e) => write!(f, "error: {e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "plsim",
    version,
    about = "Density-matrix demos, CHSH bounds, and a strictly local branching engine"
)]
struct Cli {
    /// RNG seed. Required by every sampled command; there is no wall-clock
    /// default.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Rounds per branching experiment.
    #[arg(long, global = true)]
    rounds: Option<usize>,

    /// Number of trials / experiments for sampled commands.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Tolerance override for density-matrix equality checks.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Also write the report to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Indistinguishable ensembles: different mixtures, one density matrix
    Mixtures,
    /// Singlet anticorrelation across random bases, with a classical contrast
    Singlet,
    /// The 2 / 2√2 / 4 CHSH hierarchy with audits
    Chsh,
    /// Branching-engine experiments: splitting, matching, audits
    ParallelLives,
    /// Causal audit of honest logs plus fault-injection detection
    Audit,
    /// Let a seeded quantum coin choose between two options
    Choose { option_a: String, option_b: String },
    /// Every suite in sequence under one seed
    All,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Mixtures => "mixtures",
            Command::Singlet => "singlet",
            Command::Chsh => "chsh",
            Command::ParallelLives => "parallel-lives",
            Command::Audit => "audit",
            Command::Choose { .. } => "choose",
            Command::All => "all",
        }
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64, CliError> {
    seed.ok_or_else(|| {
        CliError::Usage("this command samples; pass an explicit --seed <u64>".into())
    })
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let tolerance = cli.tol.unwrap_or(plsim::TOL_ALGEBRA);
    if let Some(t) = cli.tol {
        if !t.is_finite() || t < 0.0 {
            return Err(CliError::Usage(format!(
                "--tol must be a finite non-negative number, got {t}"
            )));
        }
    }
    let (checks, details) = match &cli.command {
        Command::Mixtures => commands::cmd_mixtures(tolerance)?,
        Command::Singlet => {
            commands::cmd_singlet(require_seed(cli.seed)?, cli.trials.unwrap_or(10_000))?
        }
        Command::Chsh => commands::cmd_chsh(require_seed(cli.seed)?, cli.trials.unwrap_or(100))?,
        Command::ParallelLives => commands::cmd_parallel_lives(
            require_seed(cli.seed)?,
            cli.rounds.unwrap_or(4),
            cli.trials.unwrap_or(50),
        )?,
        Command::Audit => commands::cmd_audit(require_seed(cli.seed)?, cli.trials.unwrap_or(100))?,
        Command::Choose { option_a, option_b } => {
            commands::cmd_choose(option_a, option_b, require_seed(cli.seed)?)?
        }
        Command::All => {
            commands::cmd_all(require_seed(cli.seed)?, tolerance, cli.trials, cli.rounds)?
        }
    };
    let config = ConfigEcho {
        seed: cli.seed,
        rounds: cli.rounds,
        trials: cli.trials,
        tolerance: cli.tol,
        format: cli.format.name().to_string(),
    };
    Ok(Report::new(cli.command.name(), config, checks, details))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let rendered = report.render(cli.format);
            print!("{rendered}");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &rendered) {
                    eprintln!("io error: failed to write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.name.as_str())
                    .collect();
                eprintln!("failed checks: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
