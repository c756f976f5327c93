use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

use mlob::parent::reconstruct_parents;
use mlob::tape::read_tape_bytes;

use crate::manifest::RunManifest;
use crate::output::{currency, currency_half, side_letter, CsvFile};

#[derive(Parser)]
pub struct Args {
    /// MLOB tape file.
    pub tape: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let mut manifest = RunManifest::new("parent-orders");
    manifest.input(&args.tape)?;

    let bytes = std::fs::read(&args.tape)
        .with_context(|| format!("reading {}", args.tape.display()))?;
    let msgs = read_tape_bytes(&bytes)?;
    for (tape, groups) in reconstruct_parents(msgs)? {
        let mut csv = CsvFile::new(
            &manifest.hash(),
            "parent,timestamp_ns,passive_side,children,volume,vwap,cost",
        );
        let multi = groups.iter().filter(|g| g.child_ns.len() > 1).count();
        for (i, g) in groups.iter().enumerate() {
            csv.row(&[
                (i + 1).to_string(),
                g.timestamp_ns.to_string(),
                side_letter(g.passive_side).into(),
                g.child_ns.len().to_string(),
                g.volume.to_string(),
                currency(g.vwap()),
                currency_half(g.cost_half),
            ]);
        }
        csv.write_to(&args.out_dir.join(format!("parents_{}.csv", tape.symbol)))?;
        super::trade_tape_csv(&tape, &manifest)
            .write_to(&args.out_dir.join(format!("trades_{}_grouped.csv", tape.symbol)))?;
        println!(
            "{}: {} parent orders ({} regrouping more than one child)",
            tape.symbol,
            groups.len(),
            multi
        );
    }
    Ok(())
}
