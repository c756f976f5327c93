use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;

use mlob::limits::{convergence_study, DiffusionParams};

use crate::manifest::RunManifest;
use crate::output::CsvFile;
use crate::svg::Panel;

#[derive(Parser)]
pub struct Args {
    /// Instantaneous correlation between price and inventory noise.
    #[arg(long, default_value_t = -0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Inventory volatility l.
    #[arg(long, default_value_t = 1.0)]
    pub inventory_vol: f64,
    /// Spread in the price-change unit (scaled by 1/sqrt(N) on the grid).
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let params = DiffusionParams {
        mu: args.mu,
        sigma: args.sigma,
        vol_l: args.inventory_vol,
        rho: args.rho,
        spread: args.spread,
        ..Default::default()
    };
    let mut manifest = RunManifest::new("limits-study");
    manifest
        .flag("rho", args.rho)
        .flag("sigma", args.sigma)
        .flag("inventory_vol", args.inventory_vol)
        .flag("spread", args.spread)
        .flag("mu", args.mu)
        .flag("replications", args.replications)
        .flag("seed", args.seed);
    let study = convergence_study(&params, &args.n_list, args.replications, args.seed)?;

    let mut csv = CsvFile::new(&manifest.hash(), "N,median_error,q25,q75");
    for row in &study.rows {
        println!(
            "N = {:7}: median |X^N - X| = {:.6} (q25 {:.6}, q75 {:.6})",
            row.n, row.median_error, row.q25, row.q75
        );
        csv.row(&[
            row.n.to_string(),
            format!("{:.6}", row.median_error),
            format!("{:.6}", row.q25),
            format!("{:.6}", row.q75),
        ]);
    }
    csv.write_to(&args.out_dir.join("limits_convergence.csv"))?;
    println!("fitted log-log decay rate: {:.4}", study.loglog_rate);

    let median: Vec<(f64, f64)> = study
        .rows
        .iter()
        .map(|r| (r.n as f64, r.median_error))
        .collect();
    let q25: Vec<(f64, f64)> = study.rows.iter().map(|r| (r.n as f64, r.q25)).collect();
    let q75: Vec<(f64, f64)> = study.rows.iter().map(|r| (r.n as f64, r.q75)).collect();
    let panel = Panel::new(
        &format!(
            "Discrete-to-continuous wealth error (rate {:.2})",
            study.loglog_rate
        ),
        "N",
        "|X^N_T - X_T|",
    )
    .log_log()
    .line("median", median)
    .line("q25", q25)
    .line("q75", q75);
    crate::svg::write(
        &args.out_dir.join("limits_convergence.svg"),
        &[panel],
        &manifest.hash(),
    )?;
    Ok(())
}
