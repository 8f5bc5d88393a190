mod commands;
mod golden;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frobrig_core::Error;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CRITERION: u8 = 2;
pub const EXIT_PRECISION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "frobrig", version, about = "Frobenius structures and local invariants of theta and Airy connections")]
pub struct Cli {
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Golden-value store (created on first use).
    #[arg(long, global = true)]
    pub golden: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = frobrig_core::acceptance::DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Theta,
    Airy,
}

#[derive(Args, Debug, Clone)]
pub struct ConnArgs {
    #[arg(long, value_enum, default_value = "theta")]
    pub kind: Kind,
    #[arg(long, default_value_t = 5)]
    pub p: u32,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// `pi`, `pi^k` or an integer.
    #[arg(long, default_value = "pi")]
    pub lam: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a θ or Airy connection and print it as JSON.
    Connection(ConnArgs),
    /// Frobenius structure: formal solve, frame fit, traces, oracle match.
    Frobenius {
        #[arg(value_enum)]
        action: FrobAction,
        #[command(flatten)]
        conn: ConnArgs,
        #[arg(long, default_value_t = 300)]
        trunc: i64,
        #[arg(long, default_value_t = 120)]
        prec: i64,
        #[arg(long, default_value_t = 130)]
        depth: i64,
        #[arg(long, default_value_t = 16)]
        budget: usize,
        /// Digits of agreement required of traces and oracle matches.
        #[arg(long, default_value_t = 8)]
        modulus: i64,
    },
    /// Gauge reduction of the pulled-back connection to canonical form.
    Canonical {
        #[arg(long, value_enum, default_value = "theta")]
        kind: Kind,
        #[arg(long, default_value_t = 5)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 80)]
        trunc: i64,
        #[arg(long, default_value_t = 300)]
        prec: i64,
    },
    /// Adjoint slope multisets as CSV.
    Slopes {
        #[arg(long = "type")]
        type_name: Option<String>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Order of the stable grading for θ (default: Coxeter number).
        #[arg(long)]
        m: Option<u32>,
    },
    /// Kloosterman or Airy exponential sums as CSV.
    Expsum {
        #[arg(long, value_enum, default_value = "kloosterman")]
        kind: SumKind,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 5)]
        p: u32,
        #[arg(long, default_value_t = 40)]
        prec: i64,
    },
    /// Rank-one modules: irregularity and the radius oracle, as CSV.
    Rank1 {
        #[arg(long, default_value_t = 5)]
        p: u32,
        /// Comma-separated `a_1, …, a_d`, each `pi`, `pi^k`, an integer, or `c*pi^k`.
        #[arg(long, conflicts_with = "random")]
        coeffs: Option<String>,
        /// Number of seeded random modules.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Simple wild parameters.
    Wild {
        #[arg(value_enum)]
        action: WildAction,
        #[arg(long, default_value_t = 5)]
        p: u32,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, default_value_t = 2)]
        h: u64,
        #[arg(long = "type")]
        type_name: Option<String>,
    },
    /// Root-system data as CSV.
    Tables {
        #[arg(long = "type")]
        type_name: Option<String>,
    },
    /// Run the acceptance criteria and write a JSON report.
    Verify {
        /// Pinned parameters only; ignores the tuning flags below.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        trunc: Option<i64>,
        #[arg(long)]
        prec: Option<i64>,
        #[arg(long)]
        depth: Option<i64>,
        #[arg(long)]
        budget: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FrobAction {
    Solve,
    Fit,
    Trace,
    Match,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SumKind {
    Kloosterman,
    Airy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WildAction {
    Count,
    Homs,
    Classes,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::InsufficientPrecision(_) | Error::ConvergenceShortfall(_)) => EXIT_PRECISION,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
