use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;

use mlob::pricing::{replication_rms, MarketSpec, OptionPayoff};

use super::price::KindArg;
use crate::manifest::RunManifest;
use crate::output::CsvFile;

#[derive(Parser)]
pub struct Args {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rate: f64,
    #[arg(long)]
    pub spread_coef: f64,
    #[arg(long)]
    pub strike: f64,
    #[arg(long)]
    pub maturity: f64,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub spot: Option<f64>,
    /// Rebalancing step counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
    pub steps: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 800)]
    pub grid_nodes: usize,
}

pub fn run(args: Args) -> Result<()> {
    let market = MarketSpec {
        sigma: args.sigma,
        rate: args.rate,
        spread_coef: args.spread_coef,
        maturity: args.maturity,
    };
    let spot = args.spot.unwrap_or(args.strike);
    let kind: OptionPayoff = args.kind.into();
    let strike = args.strike;
    let payoff = move |p: f64| match kind {
        OptionPayoff::Call => (p - strike).max(0.0),
        OptionPayoff::Put => (strike - p).max(0.0),
    };

    let mut manifest = RunManifest::new("replicate");
    manifest
        .flag("sigma", args.sigma)
        .flag("rate", args.rate)
        .flag("spread_coef", args.spread_coef)
        .flag("strike", args.strike)
        .flag("maturity", args.maturity)
        .flag("spot", spot)
        .flag("paths", args.paths)
        .flag("seed", args.seed);
    let mut csv = CsvFile::new(&manifest.hash(), "N,rms_error");
    for &n in &args.steps {
        let row = replication_rms(&market, payoff, spot, n, args.paths, args.seed, args.grid_nodes)?;
        println!("N = {:5}: rms terminal error {:.6}", n, row.rms_error);
        csv.row(&[n.to_string(), format!("{:.6}", row.rms_error)]);
    }
    csv.write_to(&args.out)?;
    println!("report written to {}", args.out.display());
    Ok(())
}
