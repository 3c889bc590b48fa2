//! Thin CLI over the library pipelines.
//!
//! Exit codes: 0 success, 1 invariant/verification failure, 2 config error,
//! 3 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use symplectic_rom::config::ExperimentConfig;
use symplectic_rom::pipeline;
use symplectic_rom::verify;

#[derive(Parser)]
#[command(
    name = "symplectic-rom",
    about = "Symplectic model reduction of Hamiltonian wave systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full-order model and write the trajectory and snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's outputs.directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the requested reduced bases and persist them with spectra.
    Reduce {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate every reduced model and emit diagnostics, summary, and figures.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SVG figures.
        #[arg(long)]
        emit_svg: bool,
    },
    /// Run the randomized cross-module invariant suite.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn dispatch(cli: Cli) -> symplectic_rom::Result<()> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.outputs.directory));
            pipeline::cmd_simulate(&cfg, &out)
        }
        Command::Reduce { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.outputs.directory));
            pipeline::cmd_reduce(&cfg, &out)
        }
        Command::Run {
            config,
            out,
            emit_svg,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.outputs.directory));
            pipeline::cmd_run(&cfg, &out, emit_svg || cfg.outputs.emit_svg)
        }
        Command::Verify { seed } => verify::cmd_verify(seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
