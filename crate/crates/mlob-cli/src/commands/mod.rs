pub mod analyze;
pub mod ingest;
pub mod limits_study;
pub mod parents;
pub mod price;
pub mod replicate;
pub mod simulate;
pub mod test_adverse;

use std::path::Path;

use anyhow::{Context, Result};
use mlob::parent::group_tape;
use mlob::tape::{read_tape_bytes, TradeTape};

use crate::manifest::RunManifest;
use crate::output::{currency_e4, side_letter, CsvFile};

/// Reads and replays a tape file; optionally regroups parent orders.
pub fn load_tapes(path: &Path, parents: bool) -> Result<Vec<TradeTape>> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let msgs = read_tape_bytes(&bytes)?;
    let tapes = mlob::tape::extract_trades(msgs)?;
    Ok(if parents {
        tapes.iter().map(|t| group_tape(t).0).collect()
    } else {
        tapes
    })
}

pub const TRADE_TAPE_HEADER: &str =
    "n,timestamp_ns,symbol,passive_side,volume,exec_price,pre_mid,pre_spread,delta_L_passive";

pub fn trade_tape_csv(tape: &TradeTape, manifest: &RunManifest) -> CsvFile {
    let mut csv = CsvFile::new(&manifest.hash(), TRADE_TAPE_HEADER);
    for t in &tape.trades {
        csv.row(&[
            t.n.to_string(),
            t.timestamp_ns.to_string(),
            tape.symbol.clone(),
            side_letter(t.passive_side).into(),
            t.volume.to_string(),
            match t.exec_price_e4() {
                Some(px) => currency_e4(px),
                None => format!("{:.4}", t.vwap()),
            },
            format!("{:.4}", t.pre_mid_half as f64 / 2e4),
            currency_e4(t.pre_spread),
            t.delta_l_passive().to_string(),
        ]);
    }
    csv
}
