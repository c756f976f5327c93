use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

use mlob::simgen::{generate_tape, InsiderConfig, SimConfig, TraderKind};
use mlob::tape::write_tape_bytes;

use crate::manifest::RunManifest;
use crate::output::CsvFile;

#[derive(Parser)]
pub struct Args {
    #[arg(long)]
    pub trades: usize,
    /// Fraction of trades placed by traders who know the next mid move.
    #[arg(long, default_value_t = 0.3)]
    pub informed_frac: f64,
    /// Probability that a noise trade is followed by a one-tick mid move.
    #[arg(long, default_value_t = 0.2)]
    pub noise_move_q: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output tape path.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth label CSV.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Tick size in 1e-4 currency units.
    #[arg(long, default_value_t = 100)]
    pub tick: i64,
    #[arg(long, default_value_t = 1)]
    pub spread_ticks: i64,
    /// Initial mid in 1e-4 currency units.
    #[arg(long, default_value_t = 1_000_000)]
    pub mid: i64,
    #[arg(long, default_value_t = 100)]
    pub vol_min: u32,
    #[arg(long, default_value_t = 100)]
    pub vol_max: u32,
    /// Print each trade as this many same-timestamp child executions.
    #[arg(long, default_value_t = 1)]
    pub split_children: u32,
    /// Experimental: fraction of trades by an insider steering toward
    /// --insider-target.
    #[arg(long)]
    pub insider_frac: Option<f64>,
    /// Experimental: the insider's target mid in 1e-4 units.
    #[arg(long)]
    pub insider_target: Option<i64>,
}

pub fn run(args: Args) -> Result<()> {
    let config = SimConfig {
        seed: args.seed,
        n_trades: args.trades,
        tick_e4: args.tick,
        spread_ticks: args.spread_ticks,
        initial_mid_e4: args.mid,
        informed_fraction: args.informed_frac,
        noise_move_prob: args.noise_move_q,
        volume_range: (args.vol_min, args.vol_max),
        split_children: args.split_children,
        insider: match (args.insider_frac, args.insider_target) {
            (Some(fraction), Some(target_mid_e4)) => Some(InsiderConfig {
                fraction,
                target_mid_e4,
            }),
            (None, None) => None,
            _ => anyhow::bail!("--insider-frac and --insider-target go together"),
        },
    };
    let (msgs, truth) = generate_tape(&config)?;
    let bytes = write_tape_bytes(&msgs)?;
    if let Some(dir) = args.out.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&args.out, &bytes)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} messages ({} bytes) realizing {} trades to {}",
        msgs.len(),
        bytes.len(),
        args.trades,
        args.out.display()
    );

    if let Some(truth_path) = &args.truth {
        let mut manifest = RunManifest::new("simulate");
        manifest
            .flag("seed", args.seed)
            .flag("trades", args.trades)
            .flag("informed_frac", args.informed_frac)
            .flag("noise_move_q", args.noise_move_q)
            .flag("split_children", args.split_children);
        let mut csv = CsvFile::new(
            &manifest.hash(),
            "n,kind,direction,volume,mid_move_ticks",
        );
        for label in &truth.labels {
            csv.row(&[
                label.n.to_string(),
                match label.kind {
                    TraderKind::Informed => "informed".into(),
                    TraderKind::Noise => "noise".into(),
                    TraderKind::Insider => "insider".into(),
                },
                label.direction.to_string(),
                label.volume.to_string(),
                label.mid_move_ticks.to_string(),
            ]);
        }
        csv.write_to(truth_path)?;
        println!(
            "ground truth ({} informed / {} total) written to {}",
            truth.informed_count(),
            truth.labels.len(),
            truth_path.display()
        );
    }
    Ok(())
}
