use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;

use mlob::hftest::{run_test, sample_correlation, VarianceKind};

use crate::manifest::RunManifest;
use crate::output::{probability, CsvFile};
use crate::Degeneracy;

#[derive(Parser)]
pub struct Args {
    /// MLOB tape file.
    pub tape: PathBuf,
    /// Buckets of equal trade counts over the tape.
    #[arg(long, default_value_t = 8)]
    pub buckets: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub parents: bool,
    #[arg(long)]
    pub drop_last_trade: bool,
    /// Use the symmetric variance proxy instead of the cross-index form.
    #[arg(long)]
    pub symmetric_variance: bool,
}

pub fn run(args: Args) -> Result<()> {
    let mut manifest = RunManifest::new("test-adverse");
    manifest.input(&args.tape)?;
    manifest
        .flag("buckets", args.buckets)
        .flag("parents", args.parents)
        .flag("drop_last_trade", args.drop_last_trade)
        .flag("symmetric_variance", args.symmetric_variance);
    let hash = manifest.hash();
    let kind = if args.symmetric_variance {
        VarianceKind::Symmetric
    } else {
        VarianceKind::AsPrinted
    };
    let suffix = if args.parents { "_bis" } else { "" };

    let tapes = super::load_tapes(&args.tape, args.parents)?;
    let mut table3 = CsvFile::new(&hash, "symbol,prob_rejection");
    let mut any_overall = false;
    for tape in &tapes {
        let pairs: Vec<(f64, f64)> = tape
            .increment_pairs(args.drop_last_trade)
            .into_iter()
            .map(|(dp, dl)| (dp as f64, dl as f64))
            .collect();
        let test = run_test(&pairs, args.buckets, kind)?;
        let mut diag = CsvFile::new(&hash, "bucket,C,V,Z,pi");
        for b in &test.buckets {
            diag.row(&[
                b.stat.index.to_string(),
                format!("{:.4}", b.stat.c),
                format!("{:.4}", b.stat.v),
                b.z.map(|z| format!("{z:.4}")).unwrap_or_else(|| "NA".into()),
                probability(b.pi),
            ]);
        }
        diag.write_to(&args.out_dir.join(format!("buckets_{}{suffix}.csv", tape.symbol)))?;
        table3.row(&[tape.symbol.clone(), probability(test.overall)]);
        any_overall |= test.overall.is_some();
        let rho = sample_correlation(&pairs)
            .map(|r| format!("{r:.4}"))
            .unwrap_or_else(|_| "NA".into());
        println!(
            "{}: overall rejection {} over {} buckets ({} degenerate), sample rho {}",
            tape.symbol,
            probability(test.overall),
            test.buckets.len(),
            test.degenerate_buckets,
            rho
        );
    }
    table3.write_to(&args.out_dir.join(format!("table3{suffix}.csv")))?;
    if !tapes.is_empty() && !any_overall {
        return Err(Degeneracy("every bucket of every symbol has V <= 0".into()).into());
    }
    Ok(())
}
