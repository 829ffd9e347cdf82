//! `toruslab`: dissipation and dynamo time scales of noisy toral maps.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Opts;
use error::{CliError, EXIT_FAILURE, EXIT_OK};

#[derive(Parser, Debug)]
#[command(
    name = "toruslab",
    version,
    about = "Noise-induced dissipation and dynamo time scales of toral automorphisms",
    after_help = "Exit codes: 0 success, 2 parse or config error, 3 computation budget \
                  exceeded, 4 precondition violated, 1 other failures.\n\
                  TORUSLAB_THREADS caps the number of worker threads."
)]
struct Cli {
    /// TOML file whose keys are the long option names; flags win over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectral report of F: characteristic polynomial, eigenvalues, entropy, ergodicity
    Analyze(Opts),
    /// Dissipation times over an ε grid and the fitted rate constant
    Dissipation(Opts),
    /// Push-forward norm curve, growth rate, peak and threshold times
    Dynamo(Opts),
    /// Truncated Fourier simulation: density trajectory and norm cross-check
    Simulate(Opts),
    /// Table of the arithmetic minimum M(n) for n = 1..n-max
    Mincurve(Opts),
    /// Ergodicity of the affine map x ↦ Fx + c
    ClassifyAffine(Opts),
    /// Whether degenerate noise B still dissipates under F
    DegeneracyCheck(Opts),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = config::thread_limit(std::env::var("TORUSLAB_THREADS").ok())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let file = match &cli.config {
        Some(path) => config::read_config_file(path)?,
        None => Opts::default(),
    };
    let (cmd, opts): (fn(&Opts) -> Result<commands::Output, CliError>, Opts) = match cli.command {
        Command::Analyze(o) => (commands::analyze, o),
        Command::Dissipation(o) => (commands::dissipation, o),
        Command::Dynamo(o) => (commands::dynamo, o),
        Command::Simulate(o) => (commands::simulate, o),
        Command::Mincurve(o) => (commands::mincurve, o),
        Command::ClassifyAffine(o) => (commands::classify_affine_cmd, o),
        Command::DegeneracyCheck(o) => (commands::degeneracy_check, o),
    };
    let opts = opts.merged(file);
    let out = cmd(&opts)?;
    if let Some(dir) = &opts.out {
        out.write_to(dir)?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(out.stdout.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("toruslab: {e}");
            let code = e.exit_code();
            ExitCode::from(if code == 0 { EXIT_FAILURE } else { code } as u8)
        }
    }
}
