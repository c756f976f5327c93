//! `mlob`: decode MLOB tapes, rebuild books, and run the clearing-ledger,
//! adverse-selection, diffusion-limit and option-pricing analytics.

mod commands;
mod manifest;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "mlob",
    version,
    about = "Limit-order-book tape analytics: exact wealth ledgers, adverse selection, diffusion limits, friction-adjusted pricing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode a tape, rebuild the books and export the per-symbol trade
    /// tape plus filtering statistics.
    Ingest(commands::ingest::Args),
    /// Impact classification, wealth models, decomposition and the
    /// per-symbol summary tables and figures.
    Analyze(commands::analyze::Args),
    /// Bucketed quadratic-covariation test for adverse selection.
    TestAdverse(commands::test_adverse::Args),
    /// Reconstruct parent orders and export the regrouped tape.
    ParentOrders(commands::parents::Args),
    /// Generate a synthetic tape with known ground truth.
    Simulate(commands::simulate::Args),
    /// Price a European option under proportional spread frictions.
    PriceOption(commands::price::Args),
    /// Delta-hedging replication error study.
    Replicate(commands::replicate::Args),
    /// Vanishing-spread diffusion-limit convergence study.
    LimitsStudy(commands::limits_study::Args),
}

/// Statistical degeneracy distinct from input-format errors (exit code 3).
#[derive(Debug)]
pub struct Degeneracy(pub String);

impl std::fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "statistical degeneracy: {}", self.0)
    }
}

impl std::error::Error for Degeneracy {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<mlob::tape::TapeError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<mlob::hftest::HfTestError>().is_some()
        || err.downcast_ref::<Degeneracy>().is_some()
    {
        return 3;
    }
    if let Some(p) = err.downcast_ref::<mlob::pricing::PricingError>() {
        if matches!(p, mlob::pricing::PricingError::IllPosedRegime { .. }) {
            return 4;
        }
    }
    1
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MLOB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Analyze(args) => commands::analyze::run(args),
        Command::TestAdverse(args) => commands::test_adverse::run(args),
        Command::ParentOrders(args) => commands::parents::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::PriceOption(args) => commands::price::run(args),
        Command::Replicate(args) => commands::replicate::run(args),
        Command::LimitsStudy(args) => commands::limits_study::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
