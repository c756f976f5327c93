//! Trade-tape extraction on the event clock.

use std::collections::BTreeMap;

use super::{Applied, BookState, CleanReason, TapeError, TapeMessage, TradeEvent};

/// Counts of execution prints kept and ignored for one symbol.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct FilterStats {
    /// All messages seen for the symbol.
    pub messages: u64,
    /// Visible executions kept on the trade tape.
    pub trades: u64,
    /// 'C' prints ignored.
    pub special_deals: u64,
    /// 'P' prints ignored.
    pub hidden_execs: u64,
    /// Visible executions cleaned (away from best or one-sided book).
    pub cleaned_execs: u64,
}

impl FilterStats {
    /// All execution prints, kept or not.
    pub fn executions_total(&self) -> u64 {
        self.trades + self.special_deals + self.hidden_execs + self.cleaned_execs
    }

    pub fn pct_special(&self) -> f64 {
        percent(self.special_deals, self.executions_total())
    }

    pub fn pct_hidden(&self) -> f64 {
        percent(self.hidden_execs, self.executions_total())
    }

    pub fn pct_cleaned(&self) -> f64 {
        percent(self.cleaned_execs, self.executions_total())
    }
}

fn percent(part: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

/// Per-symbol trade tape: executions indexed `n = 1..N` on the event clock,
/// plus the end-of-stream mid so the price increment of trade `N` is defined.
#[derive(Debug, Clone)]
pub struct TradeTape {
    pub symbol: String,
    pub locate: u16,
    pub trades: Vec<TradeEvent>,
    /// Book mid (half-units) after the last message of the stream, when the
    /// book ended two-sided.
    pub end_mid_half: Option<i64>,
    /// Book spread after the last message of the stream.
    pub end_spread: Option<i64>,
    pub filter: FilterStats,
}

impl TradeTape {
    pub fn len(&self) -> usize {
        self.trades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trades.is_empty()
    }

    /// Mid in force after trade `idx` (0-based): the mid before the next
    /// trade, or the end-of-stream mid for the last one. Falls back to the
    /// trade's own pre-mid when the stream ended one-sided.
    pub fn mid_after(&self, idx: usize) -> i64 {
        if idx + 1 < self.trades.len() {
            self.trades[idx + 1].pre_mid_half
        } else {
            self.end_mid_half
                .unwrap_or(self.trades[idx].pre_mid_half)
        }
    }

    /// Whether the price increment of trade `idx` is known (always true
    /// except for the final trade of a stream that ended one-sided).
    pub fn has_increment(&self, idx: usize) -> bool {
        idx + 1 < self.trades.len() || self.end_mid_half.is_some()
    }

    /// `(Δ_n p, Δ_n L)` pairs in (half-units, passive shares), `n = 1..N`.
    /// The final pair is omitted when `drop_last` is set or its mid is
    /// unknown.
    pub fn increment_pairs(&self, drop_last: bool) -> Vec<(i64, i64)> {
        let n = self.trades.len();
        let count = match n {
            0 => 0,
            _ if drop_last || !self.has_increment(n - 1) => n - 1,
            _ => n,
        };
        (0..count)
            .map(|i| {
                (
                    self.mid_after(i) - self.trades[i].pre_mid_half,
                    self.trades[i].delta_l_passive(),
                )
            })
            .collect()
    }
}

struct SymbolState {
    book: BookState,
    tape: TradeTape,
    msg_seq: u64,
}

/// Replays a message stream through per-symbol books and extracts, for each
/// locate code seen, the trade tape and filter statistics. Symbols are
/// returned in locate order.
pub fn extract_trades(
    messages: impl IntoIterator<Item = TapeMessage>,
) -> Result<Vec<TradeTape>, TapeError> {
    let mut symbols: BTreeMap<u16, SymbolState> = BTreeMap::new();
    for msg in messages {
        let locate = msg.locate();
        let state = symbols.entry(locate).or_insert_with(|| SymbolState {
            book: BookState::new(),
            tape: TradeTape {
                symbol: format!("LOC{locate}"),
                locate,
                trades: Vec::new(),
                end_mid_half: None,
                end_spread: None,
                filter: FilterStats::default(),
            },
            msg_seq: 0,
        });
        state.msg_seq += 1;
        state.tape.filter.messages += 1;
        if let TapeMessage::Directory { symbol, .. } = &msg {
            state.tape.symbol = String::from_utf8_lossy(symbol).trim_end().to_string();
        }
        match state.book.apply(&msg)? {
            Applied::None => {}
            Applied::Trade(fill) => {
                let stats = &mut state.tape.filter;
                stats.trades += 1;
                let n = state.tape.trades.len() as u32 + 1;
                state.tape.trades.push(TradeEvent {
                    n,
                    timestamp_ns: msg.timestamp_ns().unwrap_or(0),
                    passive_side: fill.passive_side,
                    volume: fill.volume as u64,
                    notional: fill.price * fill.volume as i64,
                    pre_mid_half: fill.pre_mid_half,
                    pre_spread: fill.pre_spread,
                    msg_seq: state.msg_seq,
                    msg_seq_end: state.msg_seq,
                });
            }
            Applied::Cleaned(reason) => {
                let stats = &mut state.tape.filter;
                match reason {
                    CleanReason::SpecialDeal => stats.special_deals += 1,
                    CleanReason::HiddenExec => stats.hidden_execs += 1,
                    CleanReason::AwayFromBest | CleanReason::OneSidedBook => {
                        stats.cleaned_execs += 1
                    }
                }
            }
        }
    }
    Ok(symbols
        .into_values()
        .map(|mut s| {
            s.tape.end_mid_half = s.book.mid_half();
            s.tape.end_spread = s.book.spread();
            s.tape
        })
        .collect())
}

/// Convenience: extract the single-symbol tape of a stream, failing the
/// (artifact-internal) expectation that exactly one locate is present.
pub fn single_tape(messages: impl IntoIterator<Item = TapeMessage>) -> Result<TradeTape, TapeError> {
    let mut tapes = extract_trades(messages)?;
    assert_eq!(tapes.len(), 1, "expected a single-symbol stream");
    Ok(tapes.pop().unwrap())
}
