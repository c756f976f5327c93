//! Price-impact classification and the spread-vs-adverse-selection split.
//!
//! A trade has price impact when the active trader's inventory change and
//! the following mid move have the same sign (`Δp·ΔL_active > 0`), reverse
//! impact when they oppose, and none when the mid does not move. Output
//! table shape, one row per symbol (values here are a documentation sample,
//! not reproducible without the underlying tape):
//!
//! ```text
//! symbol,total,with_impact,without_impact,reverse_impact
//! AA,5115,325,4789,1
//! ```

use thiserror::Error;

use crate::ledger::Perspective;
use crate::stats::ols_slope_through_origin;
use crate::tape::TradeTape;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImpactError {
    #[error("need at least two symbols for the pooled regression, got {0}")]
    InsufficientData(usize),
}

/// Sign counts of `Δ_n p · Δ_n L` over the counted trades.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ImpactCounts {
    /// Trades on the tape.
    pub total: u64,
    /// Trades with a defined price increment that were counted
    /// (`total`, minus the final trade when dropped or unknown).
    pub counted: u64,
    pub n_pos: u64,
    pub n_zero: u64,
    pub n_neg: u64,
}

impl ImpactCounts {
    pub fn pct_pos(&self) -> f64 {
        percent(self.n_pos, self.counted)
    }

    pub fn pct_zero(&self) -> f64 {
        percent(self.n_zero, self.counted)
    }

    pub fn pct_neg(&self) -> f64 {
        percent(self.n_neg, self.counted)
    }
}

fn percent(part: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

/// Classifies every counted trade by the sign of `Δ_n p · Δ_n L` from the
/// chosen perspective (active by default in the tables: impact means the
/// taker bought before an up-move).
pub fn classify_trades(tape: &TradeTape, perspective: Perspective, drop_last: bool) -> ImpactCounts {
    let mut counts = ImpactCounts {
        total: tape.len() as u64,
        ..Default::default()
    };
    for (dp, dl_passive) in tape.increment_pairs(drop_last) {
        let dl = match perspective {
            Perspective::AggregatePassive => dl_passive,
            Perspective::AggregateActive => -dl_passive,
        };
        counts.counted += 1;
        match (dp * dl).signum() {
            1 => counts.n_pos += 1,
            0 => counts.n_zero += 1,
            _ => counts.n_neg += 1,
        }
    }
    counts
}

/// Cumulative adverse-selection series `Σ_{k≤n} Δ_k p Δ_k L` with the
/// passive sign (half-units): the running losses of the passive side to
/// traders with superior information.
pub fn cumulative_adverse_selection(tape: &TradeTape) -> Vec<i64> {
    let mut acc = 0i64;
    tape.increment_pairs(false)
        .into_iter()
        .map(|(dp, dl)| {
            acc += dp * dl;
            acc
        })
        .collect()
}

/// One symbol's transaction-cost gains against adverse-selection losses,
/// in currency.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSplit {
    pub symbol: String,
    /// `Σ (s/2)|ΔL|` with the passive '+' sign (non-negative).
    pub transaction_cost: f64,
    /// `Σ Δp ΔL` with the passive sign (typically negative).
    pub adverse_selection: f64,
}

impl SymbolSplit {
    pub fn adverse_abs(&self) -> f64 {
        self.adverse_selection.abs()
    }
}

/// Pooled comparison across symbols: slope of |AS| on TC through the
/// origin, and the effective fraction `1 − slope` of the posted half-spread
/// a passive trader keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadSplit {
    pub per_symbol: Vec<SymbolSplit>,
    pub slope: f64,
    pub effective_fraction: f64,
}

pub fn spread_split(tapes: &[TradeTape]) -> Result<SpreadSplit, ImpactError> {
    if tapes.len() < 2 {
        return Err(ImpactError::InsufficientData(tapes.len()));
    }
    let per_symbol: Vec<SymbolSplit> = tapes
        .iter()
        .map(|tape| {
            let d = crate::ledger::decompose(tape);
            SymbolSplit {
                symbol: tape.symbol.clone(),
                transaction_cost: d.final_transaction_cost() as f64 / 2e4,
                adverse_selection: d.final_adverse_selection() as f64 / 2e4,
            }
        })
        .collect();
    let points: Vec<(f64, f64)> = per_symbol
        .iter()
        .map(|s| (s.transaction_cost, s.adverse_abs()))
        .collect();
    let slope = ols_slope_through_origin(&points);
    Ok(SpreadSplit {
        per_symbol,
        slope,
        effective_fraction: 1.0 - slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::{Side, TradeEvent, TradeTape};

    /// Builds a tape from (passive ΔL, next-mid-move in half-units) pairs
    /// with the given constant spread, mid starting at 2_000_000.
    pub(crate) fn tape_with_spread(moves: &[(i64, i64)], spread: i64) -> TradeTape {
        let mut mid = 2_000_000i64;
        let mut trades = Vec::new();
        for (i, (dl, dp)) in moves.iter().enumerate() {
            assert!(*dl != 0);
            let side = if *dl > 0 { Side::Bid } else { Side::Ask };
            let volume = dl.unsigned_abs();
            let exec = match side {
                Side::Bid => (mid - spread) / 2,
                Side::Ask => (mid + spread) / 2,
            };
            trades.push(TradeEvent {
                n: i as u32 + 1,
                timestamp_ns: i as u64,
                passive_side: side,
                volume,
                notional: exec * volume as i64,
                pre_mid_half: mid,
                pre_spread: spread,
                msg_seq: i as u64,
                msg_seq_end: i as u64,
            });
            mid += dp;
        }
        TradeTape {
            symbol: "T".into(),
            locate: 1,
            trades,
            end_mid_half: Some(mid),
            end_spread: Some(spread),
            filter: Default::default(),
        }
    }

    pub(crate) fn tape_from_moves(moves: &[(i64, i64)]) -> TradeTape {
        tape_with_spread(moves, 2)
    }

    #[test]
    fn three_sign_cases_enumerated() {
        // active ΔL = −passive ΔL; want (ΔL_active, Δp) = (+1,+1),(+1,0),(−1,+1)
        let tape = tape_from_moves(&[(-1, 1), (-1, 0), (1, 1)]);
        let counts = classify_trades(&tape, Perspective::AggregateActive, false);
        assert_eq!(
            counts,
            ImpactCounts {
                total: 3,
                counted: 3,
                n_pos: 1,
                n_zero: 1,
                n_neg: 1
            }
        );
    }

    #[test]
    fn zero_move_tape_is_all_zero_class() {
        let tape = tape_from_moves(&[(1, 0), (-2, 0), (3, 0)]);
        let counts = classify_trades(&tape, Perspective::AggregateActive, false);
        assert_eq!((counts.n_pos, counts.n_zero, counts.n_neg), (0, 3, 0));
    }

    #[test]
    fn passive_mirror_swaps_pos_and_neg() {
        let tape = tape_from_moves(&[(-1, 1), (-1, 0), (1, 1), (2, -1), (1, -1)]);
        let active = classify_trades(&tape, Perspective::AggregateActive, false);
        let passive = classify_trades(&tape, Perspective::AggregatePassive, false);
        assert_eq!(active.n_pos, passive.n_neg);
        assert_eq!(active.n_neg, passive.n_pos);
        assert_eq!(active.n_zero, passive.n_zero);
    }

    #[test]
    fn partition_and_drop_last() {
        let tape = tape_from_moves(&[(-1, 1), (1, 1), (1, -1), (-2, 0)]);
        let c = classify_trades(&tape, Perspective::AggregateActive, true);
        assert_eq!(c.counted, 3);
        assert_eq!(c.n_pos + c.n_zero + c.n_neg, c.counted);
    }

    #[test]
    fn cumulative_adverse_selection_path() {
        // passive loses on both informed trades here
        let tape = tape_from_moves(&[(-5, 2), (5, -2)]);
        assert_eq!(cumulative_adverse_selection(&tape), vec![-10, -20]);
    }

    #[test]
    fn informed_only_tape_has_strictly_decreasing_adverse_selection() {
        let (msgs, _) = crate::simgen::generate_tape(&crate::simgen::SimConfig {
            seed: 2,
            n_trades: 300,
            informed_fraction: 1.0,
            ..Default::default()
        })
        .unwrap();
        let tape = crate::tape::single_tape(msgs).unwrap();
        let path = cumulative_adverse_selection(&tape);
        assert!(path.windows(2).all(|w| w[1] < w[0]));
        assert!(path[0] < 0);
    }

    #[test]
    fn noise_only_tape_has_zero_mean_increments() {
        // E[Δp·ΔL] = 0 for noise traders: the path is a random walk
        let (msgs, _) = crate::simgen::generate_tape(&crate::simgen::SimConfig {
            seed: 8,
            n_trades: 10_000,
            informed_fraction: 0.0,
            noise_move_prob: 0.5,
            ..Default::default()
        })
        .unwrap();
        let tape = crate::tape::single_tape(msgs).unwrap();
        let path = cumulative_adverse_selection(&tape);
        let n = path.len() as f64;
        let increments: Vec<f64> = std::iter::once(path[0])
            .chain(path.windows(2).map(|w| w[1] - w[0]))
            .map(|v| v as f64)
            .collect();
        let mean = increments.iter().sum::<f64>() / n;
        let sd = (increments.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
        assert!(
            mean.abs() < 3.0 * sd / n.sqrt(),
            "mean increment {mean} vs se {}",
            sd / n.sqrt()
        );
    }

    #[test]
    fn empty_tape_empty_series() {
        let tape = tape_from_moves(&[]);
        assert!(cumulative_adverse_selection(&tape).is_empty());
        let c = classify_trades(&tape, Perspective::AggregateActive, false);
        assert_eq!(c.counted, 0);
    }

    #[test]
    fn spread_split_constructed_fixture() {
        // spread 10 and a mid move of −8 half-units per passive buy makes
        // |AS| = 0.8·TC exactly on every trade
        let a = tape_with_spread(&[(5, -8), (5, -8)], 10);
        let b = tape_with_spread(&[(50, -8), (20, -8), (30, -8)], 10);
        let split = spread_split(&[a, b]).unwrap();
        for s in &split.per_symbol {
            assert!((s.adverse_abs() - 0.8 * s.transaction_cost).abs() < 1e-12);
        }
        assert!((split.slope - 0.8).abs() < 1e-12);
        assert!((split.effective_fraction - 0.2).abs() < 1e-12);

        // all-AS-zero tapes -> slope 0, fraction 1
        let z1 = tape_from_moves(&[(1, 0), (-1, 0)]);
        let z2 = tape_from_moves(&[(2, 0), (-2, 0)]);
        let s = spread_split(&[z1, z2]).unwrap();
        assert_eq!(s.slope, 0.0);
        assert_eq!(s.effective_fraction, 1.0);
    }

    #[test]
    fn single_symbol_is_insufficient() {
        let t = tape_from_moves(&[(1, 0)]);
        assert_eq!(spread_split(&[t]), Err(ImpactError::InsufficientData(1)));
    }
}
