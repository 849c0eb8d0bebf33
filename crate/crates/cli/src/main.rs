mod commands;
mod config;
mod error;
mod export;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::export::Output;

/// Joint spectra, Schmidt modes and entanglement of multiplexed photon pairs.
#[derive(Debug, Parser)]
#[command(name = "biphoton", version)]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Number of Schmidt modes to keep (overrides the config).
    #[arg(long, global = true)]
    rank: Option<usize>,

    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,

    /// Print the fully defaulted configuration and exit.
    #[arg(long)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized joint spectral amplitude on the grid.
    Spectrum,
    /// Schmidt eigenvalues, modes, entropy and degeneracy pairs.
    Decompose,
    /// Schmidt modes transformed to the time domain.
    Timedomain,
    /// Entropy against ensemble shift, and optional scaling with ensemble count.
    Sweep,
    /// Dynamics oracle and decomposition invariants.
    Verify,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(rank) = cli.rank {
        cfg.rank = rank;
    }
    cfg.plot |= cli.plot;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot set up {n} threads: {e}")))?;
    }
    let cfg = load_config(&cli)?;
    if cli.print_config {
        println!("{}", cfg.to_pretty_json());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Config("no subcommand given (see --help)".into()));
    };
    let out = Output::create(&cli.out)?;
    match command {
        Command::Spectrum => commands::spectrum(&cfg, &out),
        Command::Decompose => commands::decompose(&cfg, &out),
        Command::Timedomain => commands::timedomain(&cfg, &out),
        Command::Sweep => commands::sweep(&cfg, &out),
        Command::Verify => {
            let report = commands::verify(&cfg, &out)?;
            println!("{} (max oracle deviation {:e})", report.status, report.max_oracle_deviation);
            if report.passed() {
                Ok(())
            } else {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(CliError::VerificationFailed(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BIPHOTON_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
