//! `pstchain`: design perfect-state-transfer spin chains from spectra and
//! measure their robustness to static coupling disorder.

mod artifact;
mod config;
mod error;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::artifact::read_run_config;
use crate::config::{
    AnalyzeConfig, ChainConfig, EnsembleConfig, ReproduceConfig, RunConfig, SimulateConfig, SpectrumConfig,
};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "pstchain", version, about, long_about = None)]
struct Cli {
    /// Worker threads for ensemble evaluation [default: one per core].
    #[arg(long, global = true, env = "PSTCHAIN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Output CSV file [default: stdout].
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a commensurate PST spectrum with its transfer time.
    Spectrum {
        #[command(flatten)]
        config: SpectrumConfig,
        #[command(flatten)]
        output: Output,
    },
    /// Reconstruct the coupling pattern (J_max = 1) and its verification residual.
    Chain {
        #[command(flatten)]
        config: ChainConfig,
        #[command(flatten)]
        output: Output,
    },
    /// Unperturbed end-to-end transfer amplitude and fidelity over time.
    Simulate {
        #[command(flatten)]
        config: SimulateConfig,
        #[command(flatten)]
        output: Output,
    },
    /// Disorder-averaged fidelity: over time, at echo times, or versus strength.
    Ensemble {
        #[command(flatten)]
        config: EnsembleConfig,
        #[command(flatten)]
        output: Output,
    },
    /// Localization, level-shift and read-out window diagnostics.
    Analyze {
        #[command(flatten)]
        config: AnalyzeConfig,
        #[command(flatten)]
        output: Output,
    },
    /// Write every table of the reference study for the five standard chains.
    Reproduce {
        #[command(flatten)]
        config: ReproduceConfig,
        /// Directory receiving the tables (created if missing).
        #[arg(long, default_value = "pstchain-out")]
        out_dir: PathBuf,
    },
    /// Regenerate an output file from its metadata header.
    Replay {
        /// A CSV file previously written by pstchain.
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn emit(run: RunConfig, output: Output) -> Result<()> {
    run::execute(&run)?.write(output.out.as_deref())
}

fn reproduce(config: ReproduceConfig, out_dir: PathBuf) -> Result<()> {
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    for (stem, run) in run::reproduce_plan(&config) {
        let path = out_dir.join(format!("{stem}.csv"));
        run::execute(&run)?.write(Some(&path))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Spectrum { config, output } => emit(RunConfig::Spectrum(config), output),
        Command::Chain { config, output } => emit(RunConfig::Chain(config), output),
        Command::Simulate { config, output } => emit(RunConfig::Simulate(config), output),
        Command::Ensemble { config, output } => emit(RunConfig::Ensemble(config), output),
        Command::Analyze { config, output } => emit(RunConfig::Analyze(config), output),
        Command::Reproduce { config, out_dir } => reproduce(config, out_dir),
        Command::Replay { file, output } => emit(read_run_config(&file)?, output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
