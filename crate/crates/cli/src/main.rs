//! `multipin` command-line front end.
//!
//! Exit status: 0 success, 1 a check or experiment failed, 2 usage or I/O
//! error.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use settings::Params;

#[derive(Parser, Debug)]
#[command(name = "multipin", version, about = "Random-walk polymer pinned on equispaced interfaces")]
struct Cli {
    /// `key = value` file with defaults for the shared flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Free energy and derived constants on a (delta, T) grid
    FreeEnergy {
        /// Print CSV instead of an aligned table
        #[arg(long)]
        csv: bool,
    },
    /// First-passage kernels, or their transforms at --lambda
    Kernel {
        /// Largest n listed
        #[arg(long, default_value_t = 64)]
        n_max: u64,
        /// Evaluate the transforms at this lambda instead
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
    },
    /// Deterministic oracle suite
    Validate {
        /// Largest polymer length in the exact grids
        #[arg(long = "max-N", default_value_t = 400)]
        max_n: u64,
        /// Include 2^N path enumeration
        #[arg(long)]
        brute_force: bool,
        #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
        phi_perturbation: f64,
    },
    /// Draw contact skeletons and per-replica statistics
    Sample {
        /// Compare the law of S_N with the exact endpoint law
        #[arg(long)]
        check_against_dp: bool,
        /// Condition on a contact at N
        #[arg(long)]
        constrained: bool,
    },
    /// Monte Carlo regime experiments
    Experiment {
        #[arg(value_enum)]
        regime: Regime,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Regime {
    RegimeI,
    RegimeIi,
    RegimeIii,
    Diagnostics,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let params = match &cli.config {
        Some(path) => cli.params.merge(&settings::read_config(path)?),
        None => cli.params,
    };
    if let Some(k) = params.threads()? {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    match cli.command {
        Command::FreeEnergy { csv } => commands::free_energy(&params, csv),
        Command::Kernel { n_max, lambda } => commands::kernel(&params, n_max, lambda),
        Command::Validate {
            max_n,
            brute_force,
            phi_perturbation,
        } => commands::validate(max_n, brute_force, phi_perturbation),
        Command::Sample {
            check_against_dp,
            constrained,
        } => commands::sample(&params, check_against_dp, constrained),
        Command::Experiment { regime } => commands::experiment(&params, regime),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
