use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, ValueEnum};

use mlob::pricing::{
    effective_volatility, price_closed_form, price_pde, solve_pde, GridSpec, MarketSpec,
    OptionPayoff,
};

use crate::manifest::RunManifest;
use crate::output::CsvFile;

#[derive(Clone, Copy, ValueEnum)]
pub enum KindArg {
    Call,
    Put,
}

impl From<KindArg> for OptionPayoff {
    fn from(k: KindArg) -> OptionPayoff {
        match k {
            KindArg::Call => OptionPayoff::Call,
            KindArg::Put => OptionPayoff::Put,
        }
    }
}

#[derive(Parser)]
pub struct Args {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rate: f64,
    /// Dimensionless spread coefficient s in s_t = s * sigma * p_t.
    #[arg(long)]
    pub spread_coef: f64,
    #[arg(long)]
    pub strike: f64,
    /// Maturity in years.
    #[arg(long)]
    pub maturity: f64,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Spot price; defaults to the strike.
    #[arg(long)]
    pub spot: Option<f64>,
    /// Price with the finite-difference solver only.
    #[arg(long)]
    pub pde: bool,
    /// Price with the closed form only.
    #[arg(long)]
    pub closed: bool,
    #[arg(long, default_value_t = 400)]
    pub grid_nodes: usize,
    #[arg(long, default_value_t = 400)]
    pub grid_steps: usize,
    /// Dump the solved value surface as CSV (t,p,v).
    #[arg(long)]
    pub surface_out: Option<PathBuf>,
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
    let sigma_eff = effective_volatility(&market)?;
    println!("effective volatility: {sigma_eff:.6}");

    let both = !(args.pde ^ args.closed);
    if both || args.closed {
        let price = price_closed_form(&market, kind, args.strike, spot)?;
        println!("closed_form {price:.6}");
    }
    if both || args.pde {
        let price = price_pde(
            &market,
            kind,
            args.strike,
            spot,
            Some((args.grid_nodes, args.grid_steps)),
        )?;
        println!("pde {price:.6}");
    }

    if let Some(path) = &args.surface_out {
        let mut manifest = RunManifest::new("price-option");
        manifest
            .flag("sigma", args.sigma)
            .flag("rate", args.rate)
            .flag("spread_coef", args.spread_coef)
            .flag("strike", args.strike)
            .flag("maturity", args.maturity)
            .flag("spot", spot)
            .flag("grid", format!("{}x{}", args.grid_nodes, args.grid_steps));
        let strike = args.strike;
        let payoff = move |p: f64| match kind {
            OptionPayoff::Call => (p - strike).max(0.0),
            OptionPayoff::Put => (strike - p).max(0.0),
        };
        let grid = GridSpec {
            space_nodes: args.grid_nodes,
            time_steps: args.grid_steps,
            center: (spot * args.strike).sqrt(),
            half_width_sigmas: 4.0,
        };
        let surface = solve_pde(&market, payoff, &grid)?;
        let mut csv = CsvFile::new(&manifest.hash(), "t,p,v");
        for (m, row) in surface.values.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                csv.row(&[
                    format!("{:.6}", surface.t[m]),
                    format!("{:.4}", surface.p[i]),
                    format!("{v:.6}"),
                ]);
            }
        }
        csv.write_to(path)?;
        println!("surface written to {}", path.display());
    }
    Ok(())
}
