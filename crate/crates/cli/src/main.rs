use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;

use config::{Overrides, Stage};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qnd_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

/// Simulate QND detection of an itinerant microwave photon.
#[derive(Parser)]
#[command(name = "qnd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sampling seed (overrides `[tomography] seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Cavity reflectance and phase for the qubit in g and e.
    Spectrum,
    /// Phase-flip probability versus input photon number.
    Efficiency,
    /// Conditional and joint states of the reflected mode.
    Protocol,
    /// Sampling and maximum-likelihood round trips.
    TomoSelftest,
    /// Efficiency along one parameter axis.
    Sweep,
}

impl From<Command> for Stage {
    fn from(c: Command) -> Self {
        match c {
            Command::Spectrum => Stage::Spectrum,
            Command::Efficiency => Stage::Efficiency,
            Command::Protocol => Stage::Protocol,
            Command::TomoSelftest => Stage::TomoSelftest,
            Command::Sweep => Stage::Sweep,
        }
    }
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let stage = Stage::from(cli.command);
    let cfg = config::load(cli.config.as_deref(), stage, Overrides { out: cli.out, seed: cli.seed })?;
    let files = commands::run(stage, &cfg)?;
    let manifest = cfg.manifest(stage)?;
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", cfg.out.display()));
    std::fs::create_dir_all(&cfg.out).map_err(io)?;
    std::fs::write(cfg.out.join("manifest.toml"), manifest).map_err(io)?;
    for (name, body) in files {
        std::fs::write(cfg.out.join(&name), body).map_err(io)?;
        log::info!("wrote {}", cfg.out.join(&name).display());
    }
    Ok(cfg.out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn,qnd_core::linalg=error")).init();
    match run(Cli::parse()) {
        Ok(out) => {
            println!("{}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qnd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
