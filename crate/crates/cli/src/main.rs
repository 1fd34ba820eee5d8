use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod files;

/// Random Čech complexes, Betti numbers and thermodynamic-regime experiments.
#[derive(Debug, Parser)]
#[command(name = "cechsim", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a point cloud.
    Sample(commands::SampleArgs),
    /// Betti numbers and simplex counts of the Čech complex of a cloud file.
    Betti(commands::BettiArgs),
    /// Per-point Betti numbers, simplex counts and Euler characteristic along an r-grid.
    Lln(commands::ExperimentArgs),
    /// Per-point statistics at several sample sizes.
    Convergence(commands::ConvergenceArgs),
    /// Limiting Betti numbers from a homogeneous Poisson process in a window.
    Betahat(commands::BetahatArgs),
    /// Simplex-count gap between the binomial and Poissonized processes.
    Coupling(commands::CouplingArgs),
}

/// Environment variable overriding the simplex cap of every complex.
pub const SIMPLEX_CAP_ENV: &str = "CECHSIM_SIMPLEX_CAP";

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Betti(a) => commands::betti(a),
        Command::Lln(a) => commands::lln(a),
        Command::Convergence(a) => commands::convergence(a),
        Command::Betahat(a) => commands::betahat(a),
        Command::Coupling(a) => commands::coupling(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
