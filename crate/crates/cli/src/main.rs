use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use renorm_core::ScenarioConfig;

mod output;
mod studies;

use output::{write_outputs, RunReport};
use studies::{Options, Study};

#[derive(Debug, Parser)]
#[command(
    name = "renorm",
    version,
    about = "Bogoliubov diagonalization and renormalization studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in scenario: scalar, regular, energy-renorm, charge-renorm, pauli-fierz, fock.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Corrupt the rank-one resolvent to exercise the failure path.
    #[arg(long, global = true)]
    inject_fault: bool,

    /// Record wall-clock time per study (makes reports non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integral identities, rank-one resolvent and fractional powers.
    Identities,
    /// Bogoliubov blocks, residuals, Shale trace and ground energy.
    Diagonalize,
    /// Cutoff flow selected by the regularity class.
    Flow,
    /// Logarithmic divergence probe over the configured exponents.
    ShaleScan,
    /// Truncated Fock space oracle.
    Fock,
    /// Every study in turn.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

fn load_config(cli: &Cli) -> anyhow::Result<ScenarioConfig> {
    match (&cli.config, &cli.preset) {
        (Some(path), _) => Ok(ScenarioConfig::from_path(path)?),
        (None, Some(name)) => ScenarioConfig::preset(name).with_context(|| {
            format!(
                "unknown preset {name:?}; known: {}",
                ScenarioConfig::preset_names().join(", ")
            )
        }),
        (None, None) => bail!("one of --config or --preset is required"),
    }
}

fn run(cli: &Cli) -> anyhow::Result<RunReport> {
    let config = load_config(cli)?;
    let studies: &[Study] = match cli.command {
        Command::Identities => &[Study::Identities],
        Command::Diagonalize => &[Study::Diagonalize],
        Command::Flow => &[Study::Flow],
        Command::ShaleScan => &[Study::ShaleScan],
        Command::Fock => &[Study::Fock],
        Command::All => &Study::ALL,
    };
    let options = Options {
        seed: cli.seed,
        inject_fault: cli.inject_fault,
        timing: cli.timing,
    };
    let mut report = RunReport::new(&config, options.seed, studies);
    for &study in studies {
        let outcome =
            studies::run(study, &config, &options).with_context(|| format!("{} study failed", study.name()))?;
        report.absorb(outcome);
    }
    write_outputs(&report, &cli.out, cli.format)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for line in report.summary_lines() {
                println!("{line}");
            }
            if report.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
