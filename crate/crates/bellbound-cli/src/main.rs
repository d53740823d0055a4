use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod render;

#[derive(Parser, Debug)]
#[command(name = "bellbound", version, about = "Classical bounds, maximal Bell violations and dilation bounds")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Restarts for randomized searches.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Output format (default: text; csv for bounds-table).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Cap on the copied-space dimension of source operators.
    #[arg(long = "cap-dim", global = true)]
    pub cap_dim: Option<usize>,
    /// Convergence tolerance for iterative searches.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// LHV constants of a Bell functional.
    ClassicalBound {
        /// Shorthand (chsh, mermin:N, cglmp:d) or functional JSON file.
        #[arg(long)]
        functional: String,
    },
    /// Quantum behavior, maximal violation and bound comparison for a state.
    Violation {
        #[arg(long)]
        state: String,
        /// POVM JSON file; skips the search.
        #[arg(long, conflicts_with = "optimize")]
        povm: Option<PathBuf>,
        /// Seesaw the measurements for this functional first.
        #[arg(long, alias = "functional")]
        optimize: Option<String>,
        /// Settings per party, e.g. `2,2` (a single value applies to all).
        #[arg(long)]
        settings: Option<String>,
        /// Outcomes per party, e.g. `2,2`.
        #[arg(long)]
        outcomes: Option<String>,
    },
    /// Looks for a PSD or tensor-positive source operator.
    CertifyLhv {
        #[arg(long)]
        state: String,
        #[arg(long)]
        settings: Option<String>,
        #[arg(long)]
        outcomes: Option<String>,
        /// POVM JSON file for the quasi-probability summary.
        #[arg(long)]
        povm: Option<PathBuf>,
    },
    /// Upper bound on the maximal violation from source operators.
    BoundFromDilation {
        #[arg(long)]
        state: String,
        #[arg(long)]
        settings: Option<String>,
        /// Comma-separated candidate families: product, solve, trace-norm.
        #[arg(long, default_value = "product,solve,trace-norm")]
        candidates: String,
        /// Writes the best source operator as a complex-matrix JSON file.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Evaluates the closed-form bound catalog.
    BoundsTable {
        /// Fills dims and the state family from a state descriptor.
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        settings: Option<String>,
        #[arg(long)]
        outcomes: Option<String>,
        /// generic, singlet, ghz, gghz or separable.
        #[arg(long)]
        family: Option<String>,
        /// Angle for the gghz family.
        #[arg(long)]
        phi: Option<f64>,
        /// Violation value to check against the applicable bounds.
        #[arg(long)]
        violation: Option<f64>,
    },
}

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;
pub const EXIT_BOUND_VIOLATED: u8 = 4;

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("BELLBOUND_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("BELLBOUND_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            anyhow::bail!("BELLBOUND_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<bellbound::Error>() {
        Some(bellbound::Error::Nonconvergence(_)) => EXIT_NONCONVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(&cli.command, &cli.global));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.rendered);
            if outcome.bound_violated {
                eprintln!("error: a computed violation exceeds an applicable bound");
                ExitCode::from(EXIT_BOUND_VIOLATED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
