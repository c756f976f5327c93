use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;

use crate::manifest::RunManifest;
use crate::output::{percent, CsvFile};

#[derive(Parser)]
pub struct Args {
    /// MLOB tape file.
    pub tape: PathBuf,
    /// Output directory for the CSVs.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Regroup parent orders before exporting.
    #[arg(long)]
    pub parents: bool,
}

pub fn run(args: Args) -> Result<()> {
    let mut manifest = RunManifest::new("ingest");
    manifest.input(&args.tape)?;
    manifest.flag("parents", args.parents);

    let tapes = super::load_tapes(&args.tape, args.parents)?;
    let mut stats = CsvFile::new(
        &manifest.hash(),
        "symbol,executions_total,trades_kept,pct_type_c,pct_type_p,pct_cleaned",
    );
    for tape in &tapes {
        super::trade_tape_csv(tape, &manifest)
            .write_to(&args.out_dir.join(format!("trades_{}.csv", tape.symbol)))?;
        stats.row(&[
            tape.symbol.clone(),
            tape.filter.executions_total().to_string(),
            tape.filter.trades.to_string(),
            percent(tape.filter.pct_special()),
            percent(tape.filter.pct_hidden()),
            percent(tape.filter.pct_cleaned()),
        ]);
        println!(
            "{}: {} trades kept, {:.2}% type C, {:.2}% type P ignored",
            tape.symbol,
            tape.filter.trades,
            tape.filter.pct_special(),
            tape.filter.pct_hidden()
        );
    }
    stats.write_to(&args.out_dir.join("filter_stats.csv"))?;
    Ok(())
}
