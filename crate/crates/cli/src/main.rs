use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod args;
mod commands;
mod report;

use report::Format;

#[derive(Parser)]
#[command(name = "malle-lab", version, about = "Discriminant calculus and counting experiments for S_n x A extensions")]
struct Cli {
    /// Worker threads for parallel sections; reports do not depend on it.
    #[arg(long, global = true, env = "MALLE_LAB_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Where and how a report is written. Not part of the embedded config.
#[derive(Args, Clone, Debug, Default)]
pub struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format; inferred from the output extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Order, classes and Malle invariants a, b of a permutation group.
    Invariants(commands::InvariantsArgs),
    /// Compositum discriminant exponents for S_3 x C_{l^k}, both sides tamely ramified.
    TameTable(commands::TameTableArgs),
    /// Exhaustive check of the index-ratio and uniformity inequalities.
    VerifyLemmas(commands::VerifyLemmasArgs),
    /// Count pairs with s1^a s2^b <= X and compare with the predicted asymptotic.
    Convolve(commands::ConvolveArgs),
    /// Cyclic fields of odd prime degree up to a discriminant bound, as JSONL.
    EnumerateCyclic(commands::EnumerateCyclicArgs),
    /// Non-Galois cubic fields up to |disc| <= X, as JSONL.
    EnumerateCubic(commands::EnumerateCubicArgs),
    /// Counts of cyclic fields with q | disc against (X/q)^{1/a}.
    AbelianUniformity(commands::UniformityArgs),
    /// Count composita of S_n-fields and abelian fields by discriminant.
    CountPairs(commands::CountPairsArgs),
    /// Partial Euler product for the S_3 x C_3 constant.
    EulerConstant(commands::EulerArgs),
    /// Lattice point counts on an affine scheme mod q over scaled, sheared boxes.
    SieveExp(commands::SieveArgs),
}

/// Outcome of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let run = match cli.command {
        Command::Invariants(a) => commands::invariants(a),
        Command::TameTable(a) => commands::tame_table(a),
        Command::VerifyLemmas(a) => commands::verify_lemmas(a),
        Command::Convolve(a) => commands::convolve(a),
        Command::EnumerateCyclic(a) => commands::enumerate_cyclic(a),
        Command::EnumerateCubic(a) => commands::enumerate_cubic(a),
        Command::AbelianUniformity(a) => commands::abelian_uniformity(a),
        Command::CountPairs(a) => commands::count_pairs(a),
        Command::EulerConstant(a) => commands::euler_constant(a),
        Command::SieveExp(a) => commands::sieve_exp(a),
    };
    match run {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
