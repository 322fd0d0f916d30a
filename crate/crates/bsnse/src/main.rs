use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bsnse::io::{self, CliError, RunConfig};
use bsnse::par::configure_threads;

/// Spectral Galerkin solver and verification harness for the 2D backward
/// stochastic Navier-Stokes equations.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` config file; omitted keys take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for artifacts and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides `solver.seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread count; 0 keeps the runtime default. Never changes
    /// results, only wall time.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run a backward solve and the energy audits on its output.
    Simulate,
    /// Sampled identity and inequality suites on random fields.
    Invariants,
    /// Compare a decoupled solve against the scalar closed form.
    OracleLinear,
    /// Compare a deterministic solve against the reversed forward run.
    OracleReversal,
    /// Coercivity, convection-difference and comparison-inequality audits.
    Estimates,
    /// Two-seed contraction gap against the Monte Carlo budget.
    Uniqueness,
}

impl Command {
    fn to_io(&self) -> io::Subcommand {
        match self {
            Command::Simulate => io::Subcommand::Simulate,
            Command::Invariants => io::Subcommand::Invariants,
            Command::OracleLinear => io::Subcommand::OracleLinear,
            Command::OracleReversal => io::Subcommand::OracleReversal,
            Command::Estimates => io::Subcommand::Estimates,
            Command::Uniqueness => io::Subcommand::Uniqueness,
        }
    }
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    configure_threads(cli.threads).map_err(CliError::Config)?;
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::Config)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.override_seed(seed);
    }
    let manifest = io::run(cli.command.to_io(), &config, &cli.out)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
