//! MLOB tape decoding, order-book reconstruction and trade-tape extraction.
//!
//! A tape file is `MLB1` + a 16-bit version, then length-prefixed frames,
//! each one order-book event (see [`codec`] for the exact wire layout).
//! Replaying the events through [`BookState`] yields the trade tape: one
//! [`TradeEvent`] per visible execution at the best quote, indexed on the
//! event clock, with the midprice and spread snapshotted *before* the trade.
//! Special deals ('C'), hidden executions ('P') and prints away from the
//! best quote are filtered out and counted in [`FilterStats`].

mod book;
mod codec;
mod extract;

pub use book::{Applied, BookState, CleanReason, Fill};
pub use codec::{decode_message, encode_message, read_tape_bytes, write_tape_bytes, MAGIC, VERSION};
pub use extract::{extract_trades, single_tape, FilterStats, TradeTape};

use thiserror::Error;

/// Book side of a resting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }
}

/// One decoded order-book event.
///
/// Prices are unsigned 32-bit integers in 10⁻⁴ currency units, shares are
/// unsigned 32-bit, timestamps are nanoseconds since midnight. `locate` is
/// the symbol index announced by a `Directory` message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TapeMessage {
    /// 'R' — maps a locate code to an 8-character space-padded symbol.
    Directory { locate: u16, symbol: [u8; 8] },
    /// 'T' — standalone clock message.
    Timestamp { locate: u16, timestamp_ns: u64 },
    /// 'A' — a new resting limit order.
    Add {
        locate: u16,
        timestamp_ns: u64,
        order_id: u64,
        side: Side,
        shares: u32,
        price: u32,
    },
    /// 'E' — execution against a resting order.
    Execute {
        locate: u16,
        timestamp_ns: u64,
        order_id: u64,
        shares: u32,
        match_id: u64,
    },
    /// 'X' — partial cancel.
    Cancel {
        locate: u16,
        timestamp_ns: u64,
        order_id: u64,
        shares: u32,
    },
    /// 'D' — full delete.
    Delete {
        locate: u16,
        timestamp_ns: u64,
        order_id: u64,
    },
    /// 'C' — special deal print; never touches the book.
    SpecialDeal {
        locate: u16,
        timestamp_ns: u64,
        shares: u32,
        price: u32,
    },
    /// 'P' — execution against a hidden limit order; never touches the book.
    HiddenExec {
        locate: u16,
        timestamp_ns: u64,
        side: Side,
        shares: u32,
        price: u32,
        match_id: u64,
    },
}

impl TapeMessage {
    pub fn locate(&self) -> u16 {
        match *self {
            TapeMessage::Directory { locate, .. }
            | TapeMessage::Timestamp { locate, .. }
            | TapeMessage::Add { locate, .. }
            | TapeMessage::Execute { locate, .. }
            | TapeMessage::Cancel { locate, .. }
            | TapeMessage::Delete { locate, .. }
            | TapeMessage::SpecialDeal { locate, .. }
            | TapeMessage::HiddenExec { locate, .. } => locate,
        }
    }

    /// Timestamp carried by the message; directory messages have none.
    pub fn timestamp_ns(&self) -> Option<u64> {
        match *self {
            TapeMessage::Directory { .. } => None,
            TapeMessage::Timestamp { timestamp_ns, .. }
            | TapeMessage::Add { timestamp_ns, .. }
            | TapeMessage::Execute { timestamp_ns, .. }
            | TapeMessage::Cancel { timestamp_ns, .. }
            | TapeMessage::Delete { timestamp_ns, .. }
            | TapeMessage::SpecialDeal { timestamp_ns, .. }
            | TapeMessage::HiddenExec { timestamp_ns, .. } => Some(timestamp_ns),
        }
    }

    pub fn kind_code(&self) -> u8 {
        match self {
            TapeMessage::Directory { .. } => b'R',
            TapeMessage::Timestamp { .. } => b'T',
            TapeMessage::Add { .. } => b'A',
            TapeMessage::Execute { .. } => b'E',
            TapeMessage::Cancel { .. } => b'X',
            TapeMessage::Delete { .. } => b'D',
            TapeMessage::SpecialDeal { .. } => b'C',
            TapeMessage::HiddenExec { .. } => b'P',
        }
    }
}

/// One execution on the event clock.
///
/// `pre_mid_half` and `pre_spread` are the midprice (in half-units,
/// `bid + ask`) and spread (`ask − bid`, 10⁻⁴ units) of the book immediately
/// before the trade. `notional` is the exact cash exchanged (10⁻⁴ units);
/// for a trade at the best quote it equals `exec_price · volume`, for a
/// regrouped parent order it sums the child fills. `msg_seq..=msg_seq_end`
/// is the span of per-symbol message ordinals of the fills composing the
/// event, used by parent-order grouping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeEvent {
    pub n: u32,
    pub timestamp_ns: u64,
    pub passive_side: Side,
    pub volume: u64,
    pub notional: i64,
    pub pre_mid_half: i64,
    pub pre_spread: i64,
    pub msg_seq: u64,
    pub msg_seq_end: u64,
}

impl TradeEvent {
    /// Inventory change of the aggregate passive trader: +volume when the
    /// resting order was a bid (the passive side bought), −volume when it
    /// was an ask.
    pub fn delta_l_passive(&self) -> i64 {
        match self.passive_side {
            Side::Bid => self.volume as i64,
            Side::Ask => -(self.volume as i64),
        }
    }

    pub fn delta_l_active(&self) -> i64 {
        -self.delta_l_passive()
    }

    /// Transaction cost of the event in half-units, relative to the
    /// pre-trade mid: `spread · volume` for a fill at the best quote,
    /// strictly larger for a parent order that walked the book.
    pub fn cost_half(&self) -> i64 {
        match self.passive_side {
            Side::Ask => 2 * self.notional - self.pre_mid_half * self.volume as i64,
            Side::Bid => self.pre_mid_half * self.volume as i64 - 2 * self.notional,
        }
    }

    /// Execution price in 10⁻⁴ units when the notional divides evenly
    /// (always true for single fills at the best quote).
    pub fn exec_price_e4(&self) -> Option<i64> {
        if self.volume > 0 && self.notional % self.volume as i64 == 0 {
            Some(self.notional / self.volume as i64)
        } else {
            None
        }
    }

    /// Volume-weighted execution price in currency.
    pub fn vwap(&self) -> f64 {
        self.notional as f64 / self.volume as f64 / 1e4
    }
}

/// Errors for decoding, encoding and book reconstruction.
#[derive(Debug, Error)]
pub enum TapeError {
    #[error("truncated frame: length prefix says {declared} bytes, {available} available")]
    TruncatedFrame { declared: usize, available: usize },
    #[error("unknown message kind code 0x{0:02x}")]
    UnknownKind(u8),
    #[error("field out of range in '{kind}' message: {field}")]
    FieldRange { kind: char, field: &'static str },
    #[error("bad magic: expected MLB1")]
    BadMagic,
    #[error("unsupported tape format version {0}")]
    BadVersion(u16),
    #[error("timestamp regression: {current} after {previous}")]
    TimestampRegression { previous: u64, current: u64 },
    #[error("message references unknown order id {0}")]
    UnknownOrder(u64),
    #[error("'{kind}' for {requested} shares exceeds {remaining} remaining on order {order_id}")]
    OverExecution {
        kind: char,
        order_id: u64,
        requested: u32,
        remaining: u32,
    },
    #[error("crossed book: best bid {best_bid} >= best ask {best_ask}")]
    CrossedBook { best_bid: i64, best_ask: i64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
