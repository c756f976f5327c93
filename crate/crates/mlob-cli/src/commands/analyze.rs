use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, ValueEnum};

use mlob::impact::{classify_trades, cumulative_adverse_selection, spread_split};
use mlob::ledger::{
    decompose, run_ledger, table2_metrics, wealth_model_series, ErrorBasis, Perspective,
    WealthModel,
};
use mlob::tape::TradeTape;

use crate::manifest::RunManifest;
use crate::output::{currency, currency_half, ratio, CsvFile};
use crate::svg::{render, Panel};

#[derive(Clone, Copy, ValueEnum)]
pub enum PerspectiveArg {
    Passive,
    Active,
}

impl From<PerspectiveArg> for Perspective {
    fn from(p: PerspectiveArg) -> Perspective {
        match p {
            PerspectiveArg::Passive => Perspective::AggregatePassive,
            PerspectiveArg::Active => Perspective::AggregateActive,
        }
    }
}

#[derive(Parser)]
pub struct Args {
    /// MLOB tape file.
    pub tape: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Regroup parent orders first (produces the -bis table variants).
    #[arg(long)]
    pub parents: bool,
    /// Ledger perspective for the wealth figures and Table 2.
    #[arg(long, value_enum, default_value = "passive")]
    pub perspective: PerspectiveArg,
    /// Perspective for the impact classification in Table 1.
    #[arg(long, value_enum, default_value = "active")]
    pub impact_perspective: PerspectiveArg,
    /// Exclude the final trade (whose price increment uses the
    /// end-of-stream mid) from the impact statistics.
    #[arg(long)]
    pub drop_last_trade: bool,
    /// Report the sup-over-day relative error instead of end-of-day.
    #[arg(long)]
    pub sup_error: bool,
    /// Normalize figure axes (event clock to [0,1], adverse-selection paths
    /// by their maximum magnitude).
    #[arg(long)]
    pub rescale: bool,
}

pub fn run(args: Args) -> Result<()> {
    let mut manifest = RunManifest::new("analyze");
    manifest.input(&args.tape)?;
    manifest
        .flag("parents", args.parents)
        .flag("drop_last_trade", args.drop_last_trade)
        .flag("sup_error", args.sup_error)
        .flag("rescale", args.rescale)
        .flag(
            "perspective",
            match args.perspective {
                PerspectiveArg::Passive => "passive",
                PerspectiveArg::Active => "active",
            },
        )
        .flag(
            "impact_perspective",
            match args.impact_perspective {
                PerspectiveArg::Passive => "passive",
                PerspectiveArg::Active => "active",
            },
        );
    let hash = manifest.hash();

    let tapes = super::load_tapes(&args.tape, args.parents)?;
    let suffix = if args.parents { "_bis" } else { "" };

    let mut table1 = CsvFile::new(&hash, "symbol,total,with_impact,without_impact,reverse_impact");
    let mut table2 = CsvFile::new(&hash, "symbol,relative_error,friction_ratio,net_pnl");
    let basis = if args.sup_error {
        ErrorBasis::SupOverDay
    } else {
        ErrorBasis::EndOfDay
    };

    for tape in &tapes {
        let counts = classify_trades(tape, args.impact_perspective.into(), args.drop_last_trade);
        table1.row(&[
            tape.symbol.clone(),
            counts.counted.to_string(),
            counts.n_pos.to_string(),
            counts.n_zero.to_string(),
            counts.n_neg.to_string(),
        ]);
        let metrics = table2_metrics(tape, basis);
        table2.row(&[
            tape.symbol.clone(),
            ratio(metrics.relative_error),
            ratio(metrics.friction_ratio),
            currency(metrics.net_pnl),
        ]);

        write_ledger_csv(tape, &hash, &args)?;
        write_wealth_fig(tape, &hash, &args)?;
        write_summary_fig(tape, &hash, &args)?;
    }
    table1.write_to(&args.out_dir.join(format!("table1{suffix}.csv")))?;
    table2.write_to(&args.out_dir.join(format!("table2{suffix}.csv")))?;

    write_adverse_selection_fig(&tapes, &hash, &args)?;
    if tapes.len() >= 2 {
        let split = spread_split(&tapes)?;
        let mut csv = CsvFile::new(&hash, "symbol,transaction_cost,adverse_selection_abs");
        for s in &split.per_symbol {
            csv.row(&[
                s.symbol.clone(),
                currency(s.transaction_cost),
                currency(s.adverse_abs()),
            ]);
        }
        csv.write_to(&args.out_dir.join("effective_spread.csv"))?;
        let points: Vec<(f64, f64)> = split
            .per_symbol
            .iter()
            .map(|s| (s.transaction_cost, s.adverse_abs()))
            .collect();
        let panel = Panel::new(
            "Transaction cost vs adverse selection (per symbol)",
            "transaction cost",
            "|adverse selection|",
        )
        .log_log()
        .with_diagonal()
        .scatter("symbols", points);
        std::fs::write(args.out_dir.join("fig3.svg"), render(&[panel], &hash))?;
        println!(
            "effective spread fraction: {:.4} (|AS| ~ {:.4} x TC over {} symbols)",
            split.effective_fraction,
            split.slope,
            split.per_symbol.len()
        );
    }
    println!("tables written to {}", args.out_dir.display());
    Ok(())
}

fn event_axis(n: usize, rescale: bool) -> impl Fn(usize) -> f64 {
    let denom = if rescale { n.max(1) as f64 } else { 1.0 };
    move |i: usize| i as f64 / denom
}

fn write_ledger_csv(tape: &TradeTape, hash: &str, args: &Args) -> Result<()> {
    let series = run_ledger(tape, args.perspective.into());
    let d = decompose(tape);
    let mut csv = CsvFile::new(hash, "n,p,s,L,K,X,F,T,A");
    for (i, row) in series.rows.iter().enumerate() {
        let (f, t, a) = if i == 0 {
            (0, 0, 0)
        } else {
            (
                d.frictionless[i - 1],
                d.transaction_cost[i - 1],
                d.adverse_selection[i - 1],
            )
        };
        csv.row(&[
            row.n.to_string(),
            format!("{:.4}", row.mid_half as f64 / 2e4),
            row.spread
                .map(|s| format!("{:.4}", s as f64 / 1e4))
                .unwrap_or_else(|| "NA".into()),
            row.inventory.to_string(),
            currency_half(row.cash_half),
            currency_half(row.wealth_half),
            currency_half(f),
            currency_half(t),
            currency_half(a),
        ]);
    }
    csv.write_to(&args.out_dir.join(format!("ledger_{}.csv", tape.symbol)))
}

fn write_wealth_fig(tape: &TradeTape, hash: &str, args: &Args) -> Result<()> {
    let perspective = args.perspective.into();
    let actual = run_ledger(tape, perspective);
    let x = event_axis(tape.len(), args.rescale);
    let path = |series: Vec<i64>| -> Vec<(f64, f64)> {
        series
            .iter()
            .enumerate()
            .map(|(i, v)| (x(i), *v as f64 / 2e4))
            .collect()
    };
    let actual_pts: Vec<(f64, f64)> = actual
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (x(i), (r.wealth_half - actual.rows[0].wealth_half) as f64 / 2e4))
        .collect();
    let panel = Panel::new(
        &format!("Wealth of the aggregate trader ({})", tape.symbol),
        if args.rescale { "event clock (rescaled)" } else { "trade n" },
        "wealth",
    )
    .line("actual (ledger)", actual_pts)
    .line(
        "frictionless",
        path(wealth_model_series(tape, WealthModel::Frictionless, perspective)),
    )
    .line(
        "with transaction costs",
        path(wealth_model_series(tape, WealthModel::WithTransactionCosts, perspective)),
    )
    .line(
        "complete",
        path(wealth_model_series(tape, WealthModel::Complete, perspective)),
    );
    crate::svg::write(
        &args.out_dir.join(format!("fig1_{}.svg", tape.symbol)),
        &[panel],
        hash,
    )
}

fn write_adverse_selection_fig(tapes: &[TradeTape], hash: &str, args: &Args) -> Result<()> {
    let mut panel = Panel::new(
        "Cumulative losses to adverse selection",
        if args.rescale { "event clock (rescaled)" } else { "trade n" },
        if args.rescale { "cumulative (normalized)" } else { "cumulative" },
    );
    for tape in tapes {
        let series = cumulative_adverse_selection(tape);
        let scale = if args.rescale {
            series.iter().map(|v| v.abs()).max().unwrap_or(1).max(1) as f64
        } else {
            2e4
        };
        let x = event_axis(series.len(), args.rescale);
        let pts: Vec<(f64, f64)> = series
            .iter()
            .enumerate()
            .map(|(i, v)| (x(i + 1), *v as f64 / scale))
            .collect();
        panel = panel.line(&tape.symbol, pts);
    }
    crate::svg::write(&args.out_dir.join("fig2.svg"), &[panel], hash)
}

fn write_summary_fig(tape: &TradeTape, hash: &str, args: &Args) -> Result<()> {
    let series = run_ledger(tape, args.perspective.into());
    let x = event_axis(tape.len(), args.rescale);
    let pick = |f: &dyn Fn(&mlob::ledger::LedgerRow) -> f64| -> Vec<(f64, f64)> {
        series
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (x(i), f(r)))
            .collect()
    };
    let panels = [
        Panel::new(&format!("Inventory ({})", tape.symbol), "trade n", "shares")
            .line("L", pick(&|r| r.inventory as f64)),
        Panel::new("Cash", "trade n", "cash").line("K", pick(&|r| r.cash_half as f64 / 2e4)),
        Panel::new("Wealth", "trade n", "wealth")
            .line("X", pick(&|r| r.wealth_half as f64 / 2e4)),
    ];
    crate::svg::write(
        &args.out_dir.join(format!("fig4_{}.svg", tape.symbol)),
        &panels,
        hash,
    )
}
