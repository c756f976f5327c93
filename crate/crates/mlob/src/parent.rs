//! Parent-order reconstruction and the convex book-walking cost.
//!
//! A market order that walks the book prints as several executions. Child
//! trades are regrouped into one parent when they share the exact same
//! timestamp, the same direction, and no other message for the symbol sits
//! between them — a deliberately conservative heuristic. The regrouped
//! trade keeps the mid and spread snapshotted before its first child, so
//! its transaction cost is the convex ladder-walking cost `c(l)` relative
//! to that mid, with `c(l) = (s/2)·|l|` whenever the volume fits at the
//! best quote.

use thiserror::Error;

use crate::ledger::OrderKind;
use crate::tape::{BookState, Side, TapeError, TapeMessage, TradeEvent, TradeTape};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostError {
    #[error("order for {requested} shares exceeds the {available} displayed on that side")]
    InsufficientDepth { requested: u64, available: u64 },
    #[error("mid undefined: one side of the book is empty")]
    UndefinedMid,
}

/// One regrouped parent order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentGroup {
    /// Event-clock indices (1-based) of the children on the original tape.
    pub child_ns: Vec<u32>,
    pub timestamp_ns: u64,
    pub passive_side: Side,
    pub volume: u64,
    /// Exact cash exchanged, 10⁻⁴ units.
    pub notional: i64,
    /// Ladder cost relative to the first child's pre-trade mid, half-units.
    pub cost_half: i64,
}

impl ParentGroup {
    pub fn vwap(&self) -> f64 {
        self.notional as f64 / self.volume as f64 / 1e4
    }
}

/// Cost of consuming `l` signed shares from the book relative to the
/// current mid, in half-units: positive `l` walks the ask ladder, negative
/// the bid ladder. Equals `(s/2)·|l|` while `|l|` fits at the best quote
/// and is convex and increasing beyond it.
pub fn convex_cost(book: &BookState, l: i64) -> Result<i64, CostError> {
    if l == 0 {
        return Ok(0);
    }
    let mid_half = book.mid_half().ok_or(CostError::UndefinedMid)?;
    let side = if l > 0 { Side::Ask } else { Side::Bid };
    let ladder = book.depth(side);
    let mut remaining = l.unsigned_abs();
    let mut cost = 0i64;
    for (price, shares) in ladder {
        if remaining == 0 {
            break;
        }
        let take = remaining.min(shares);
        let per_share = match side {
            Side::Ask => 2 * price - mid_half,
            Side::Bid => mid_half - 2 * price,
        };
        cost += per_share * take as i64;
        remaining -= take;
    }
    if remaining > 0 {
        return Err(CostError::InsufficientDepth {
            requested: l.unsigned_abs(),
            available: l.unsigned_abs() - remaining,
        });
    }
    Ok(cost)
}

/// Wealth change with a general transaction-cost function:
/// `ΔX = L·Δp ± c(ΔL) + Δp·ΔL`, `+` iff limit order. `cost` must already
/// be evaluated at `|ΔL|` (half-units, nonnegative).
pub fn wealth_delta_general(
    inventory: i64,
    dp_half: i64,
    cost_half: i64,
    dl: i64,
    kind: OrderKind,
) -> i64 {
    inventory * dp_half + kind.cost_sign() * cost_half + dp_half * dl
}

/// Regroups a single symbol's tape. Children are merged when consecutive
/// on the symbol's message stream (`msg_seq` contiguous) with equal
/// timestamps and equal passive side. Idempotent: regrouping a regrouped
/// tape changes nothing, because groups are maximal runs.
pub fn group_tape(tape: &TradeTape) -> (TradeTape, Vec<ParentGroup>) {
    let mut parents: Vec<ParentGroup> = Vec::new();
    let mut events: Vec<TradeEvent> = Vec::new();
    let mut iter = tape.trades.iter().peekable();
    while let Some(first) = iter.next() {
        let mut group = ParentGroup {
            child_ns: vec![first.n],
            timestamp_ns: first.timestamp_ns,
            passive_side: first.passive_side,
            volume: first.volume,
            notional: first.notional,
            cost_half: first.cost_half(),
        };
        let mut event = first.clone();
        while let Some(next) = iter.peek() {
            let adjacent = next.msg_seq == event.msg_seq_end + 1;
            let same_ts = next.timestamp_ns == first.timestamp_ns;
            let same_dir = next.passive_side == first.passive_side;
            if !(adjacent && same_ts && same_dir) {
                break;
            }
            let next = iter.next().unwrap();
            group.child_ns.push(next.n);
            group.volume += next.volume;
            group.notional += next.notional;
            // child cost is re-based to the first child's mid
            group.cost_half += match first.passive_side {
                Side::Ask => 2 * next.notional - first.pre_mid_half * next.volume as i64,
                Side::Bid => first.pre_mid_half * next.volume as i64 - 2 * next.notional,
            };
            event.volume += next.volume;
            event.notional += next.notional;
            event.msg_seq_end = next.msg_seq_end;
        }
        event.n = events.len() as u32 + 1;
        events.push(event);
        parents.push(group);
    }
    let grouped = TradeTape {
        symbol: tape.symbol.clone(),
        locate: tape.locate,
        trades: events,
        end_mid_half: tape.end_mid_half,
        end_spread: tape.end_spread,
        filter: tape.filter.clone(),
    };
    (grouped, parents)
}

/// Extracts trade tapes from a raw message stream and regroups parent
/// orders per symbol.
pub fn reconstruct_parents(
    messages: impl IntoIterator<Item = TapeMessage>,
) -> Result<Vec<(TradeTape, Vec<ParentGroup>)>, TapeError> {
    Ok(crate::tape::extract_trades(messages)?
        .iter()
        .map(group_tape)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::{extract_trades, single_tape};

    fn add(ts: u64, order_id: u64, side: Side, shares: u32, price: u32) -> TapeMessage {
        TapeMessage::Add {
            locate: 1,
            timestamp_ns: ts,
            order_id,
            side,
            shares,
            price,
        }
    }

    fn exec(ts: u64, order_id: u64, shares: u32) -> TapeMessage {
        TapeMessage::Execute {
            locate: 1,
            timestamp_ns: ts,
            order_id,
            shares,
            match_id: 0,
        }
    }

    /// bid 100.00x100 (+99.98x100 behind), ask 100.04x100 with 100.06x100 behind
    fn laddered_book_msgs() -> Vec<TapeMessage> {
        vec![
            add(0, 1, Side::Bid, 100, 1_000_000),
            add(0, 2, Side::Bid, 100, 999_800),
            add(0, 3, Side::Ask, 100, 1_000_400),
            add(0, 4, Side::Ask, 100, 1_000_600),
        ]
    }

    fn book_from(msgs: &[TapeMessage]) -> BookState {
        let mut book = BookState::new();
        for m in msgs {
            book.apply(m).unwrap();
        }
        book
    }

    #[test]
    fn cost_at_best_is_half_spread_times_volume() {
        let book = book_from(&laddered_book_msgs());
        // mid 100.02, spread 0.04; 100.04 ask: (s/2)|l| = 0.02·l
        assert_eq!(convex_cost(&book, 100).unwrap(), 400 * 100);
        assert_eq!(convex_cost(&book, -50).unwrap(), 400 * 50);
        assert_eq!(convex_cost(&book, 0).unwrap(), 0);
    }

    #[test]
    fn ladder_walk_hand_value() {
        let book = book_from(&laddered_book_msgs());
        // buy 150: 0.02·100 + 0.04·50 = 4.00 currency = 80_000 half-units
        assert_eq!(convex_cost(&book, 150).unwrap(), 80_000);
    }

    #[test]
    fn cost_is_convex_in_volume() {
        let book = book_from(&laddered_book_msgs());
        let costs: Vec<i64> = (0..=200)
            .map(|l| convex_cost(&book, l).unwrap())
            .collect();
        // non-decreasing marginal cost per share
        let marginals: Vec<i64> = costs.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(marginals.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn insufficient_depth_and_undefined_mid() {
        let book = book_from(&laddered_book_msgs());
        assert_eq!(
            convex_cost(&book, 300),
            Err(CostError::InsufficientDepth {
                requested: 300,
                available: 200
            })
        );
        let one_sided = book_from(&laddered_book_msgs()[..2]);
        assert_eq!(convex_cost(&one_sided, 5), Err(CostError::UndefinedMid));
    }

    #[test]
    fn wealth_delta_general_reduces_to_exact_form() {
        // c(l) = (s/2)|l| with s = 0.02 -> cost_half = 200·|ΔL|
        let dl = 3i64;
        let cost = 200 * dl.abs();
        assert_eq!(
            wealth_delta_general(5, 400, cost, dl, OrderKind::Limit),
            crate::ledger::wealth_delta_exact(5, 400, 200, dl, OrderKind::Limit)
        );
        assert_eq!(wealth_delta_general(5, 400, 0, 0, OrderKind::Market), 5 * 400);
    }

    #[test]
    fn same_timestamp_adjacent_children_group() {
        let mut msgs = laddered_book_msgs();
        msgs.push(exec(10, 3, 100)); // exhausts best ask
        msgs.push(exec(10, 4, 50)); // second child at next level
        let tape = single_tape(msgs).unwrap();
        assert_eq!(tape.len(), 2);
        let (grouped, parents) = group_tape(&tape);
        assert_eq!(grouped.len(), 1);
        assert_eq!(parents.len(), 1);
        let p = &parents[0];
        assert_eq!(p.child_ns, vec![1, 2]);
        assert_eq!(p.volume, 150);
        // vwap: (100.04·100 + 100.06·50)/150
        assert_eq!(p.notional, 1_000_400 * 100 + 1_000_600 * 50);
        // cost equals the convex ladder cost from the pre-parent book
        let book = book_from(&laddered_book_msgs());
        assert_eq!(p.cost_half, convex_cost(&book, 150).unwrap());
        assert_eq!(grouped.trades[0].cost_half(), p.cost_half);
        // volume conserved
        assert_eq!(
            grouped.trades.iter().map(|t| t.volume).sum::<u64>(),
            tape.trades.iter().map(|t| t.volume).sum::<u64>()
        );
    }

    #[test]
    fn intervening_message_splits_parents() {
        let mut msgs = laddered_book_msgs();
        msgs.push(exec(10, 3, 50));
        // a cancel for the same symbol between the two executions
        msgs.push(TapeMessage::Cancel {
            locate: 1,
            timestamp_ns: 10,
            order_id: 2,
            shares: 10,
        });
        msgs.push(exec(10, 3, 50));
        let tape = single_tape(msgs).unwrap();
        let (grouped, parents) = group_tape(&tape);
        assert_eq!(grouped.len(), 2);
        assert_eq!(parents.len(), 2);
    }

    #[test]
    fn opposite_directions_split_parents() {
        let mut msgs = laddered_book_msgs();
        msgs.push(exec(10, 3, 50)); // buy side hits ask
        msgs.push(exec(10, 1, 50)); // sell side hits bid, same ts, adjacent
        let tape = single_tape(msgs).unwrap();
        let (grouped, _) = group_tape(&tape);
        assert_eq!(grouped.len(), 2);
    }

    #[test]
    fn different_timestamps_split_parents() {
        let mut msgs = laddered_book_msgs();
        msgs.push(exec(10, 3, 50));
        msgs.push(exec(11, 3, 50));
        let tape = single_tape(msgs).unwrap();
        let (grouped, _) = group_tape(&tape);
        assert_eq!(grouped.len(), 2);
    }

    #[test]
    fn grouping_is_idempotent() {
        let mut msgs = laddered_book_msgs();
        msgs.push(exec(10, 3, 100));
        msgs.push(exec(10, 4, 30));
        msgs.push(exec(12, 4, 20));
        msgs.push(exec(12, 1, 40));
        let tape = single_tape(msgs).unwrap();
        let (once, _) = group_tape(&tape);
        let (twice, _) = group_tape(&once);
        assert_eq!(once.trades, twice.trades);
    }

    #[test]
    fn multi_symbol_parent_reconstruction() {
        let mut msgs = laddered_book_msgs();
        // interleave another locate's message between children: must NOT split
        msgs.push(exec(10, 3, 50));
        msgs.push(TapeMessage::Timestamp {
            locate: 2,
            timestamp_ns: 10,
        });
        msgs.push(exec(10, 3, 50));
        let per_symbol = reconstruct_parents(msgs).unwrap();
        assert_eq!(per_symbol.len(), 2);
        let (grouped, parents) = &per_symbol[0];
        assert_eq!(grouped.len(), 1);
        assert_eq!(parents[0].volume, 100);
        let _ = extract_trades(Vec::new());
    }
}
