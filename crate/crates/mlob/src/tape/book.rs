//! Order-book state: aggregated price levels plus an order index.

use std::collections::{BTreeMap, HashMap};

use super::{Side, TapeError, TapeMessage};

#[derive(Debug, Clone, Copy)]
struct RestingOrder {
    side: Side,
    price: i64,
    remaining: u32,
}

/// Reconstructed book for one symbol: per side a sorted map from price to
/// aggregate resting shares, plus an index from order id to its remains.
#[derive(Debug, Default, Clone)]
pub struct BookState {
    bids: BTreeMap<i64, u64>,
    asks: BTreeMap<i64, u64>,
    orders: HashMap<u64, RestingOrder>,
}

/// A visible execution at the best quote, with the book snapshot taken
/// before it was applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fill {
    pub passive_side: Side,
    pub volume: u32,
    pub price: i64,
    pub pre_mid_half: i64,
    pub pre_spread: i64,
}

/// Why an execution print was excluded from the trade tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleanReason {
    SpecialDeal,
    HiddenExec,
    /// Resting order was not at the best quote on its side.
    AwayFromBest,
    /// Mid/spread undefined because one side of the book was empty.
    OneSidedBook,
}

/// Result of applying one message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applied {
    None,
    Trade(Fill),
    Cleaned(CleanReason),
}

impl BookState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<i64> {
        self.bids.last_key_value().map(|(p, _)| *p)
    }

    pub fn best_ask(&self) -> Option<i64> {
        self.asks.first_key_value().map(|(p, _)| *p)
    }

    /// Midprice in half-units (`bid + ask`), defined only on a two-sided book.
    pub fn mid_half(&self) -> Option<i64> {
        Some(self.best_bid()? + self.best_ask()?)
    }

    /// Spread `ask − bid` in 10⁻⁴ units.
    pub fn spread(&self) -> Option<i64> {
        Some(self.best_ask()? - self.best_bid()?)
    }

    pub fn total_resting_shares(&self) -> u64 {
        self.bids.values().sum::<u64>() + self.asks.values().sum::<u64>()
    }

    /// Price ladder on one side, best first.
    pub fn depth(&self, side: Side) -> Vec<(i64, u64)> {
        match side {
            Side::Bid => self.bids.iter().rev().map(|(p, s)| (*p, *s)).collect(),
            Side::Ask => self.asks.iter().map(|(p, s)| (*p, *s)).collect(),
        }
    }

    pub fn order_count(&self) -> usize {
        self.orders.len()
    }

    fn levels_mut(&mut self, side: Side) -> &mut BTreeMap<i64, u64> {
        match side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        }
    }

    fn reduce(&mut self, order_id: u64, shares: u32, kind: char) -> Result<RestingOrder, TapeError> {
        let order = self
            .orders
            .get_mut(&order_id)
            .ok_or(TapeError::UnknownOrder(order_id))?;
        if shares > order.remaining {
            return Err(TapeError::OverExecution {
                kind,
                order_id,
                requested: shares,
                remaining: order.remaining,
            });
        }
        order.remaining -= shares;
        let snapshot = *order;
        if order.remaining == 0 {
            self.orders.remove(&order_id);
        }
        let levels = self.levels_mut(snapshot.side);
        let level = levels.get_mut(&snapshot.price).expect("level for resting order");
        *level -= shares as u64;
        if *level == 0 {
            levels.remove(&snapshot.price);
        }
        Ok(snapshot)
    }

    fn check_uncrossed(&self) -> Result<(), TapeError> {
        if let (Some(b), Some(a)) = (self.best_bid(), self.best_ask()) {
            if b >= a {
                return Err(TapeError::CrossedBook {
                    best_bid: b,
                    best_ask: a,
                });
            }
        }
        Ok(())
    }

    /// Applies one message. Executions against a resting order at the best
    /// quote of a two-sided book produce a [`Fill`] carrying the pre-trade
    /// mid and spread; executions away from the best or on a one-sided book
    /// are cleaned, 'C' and 'P' prints are cleaned without touching the book.
    pub fn apply(&mut self, msg: &TapeMessage) -> Result<Applied, TapeError> {
        match *msg {
            TapeMessage::Directory { .. } | TapeMessage::Timestamp { .. } => Ok(Applied::None),
            TapeMessage::SpecialDeal { .. } => Ok(Applied::Cleaned(CleanReason::SpecialDeal)),
            TapeMessage::HiddenExec { .. } => Ok(Applied::Cleaned(CleanReason::HiddenExec)),
            TapeMessage::Add {
                order_id,
                side,
                shares,
                price,
                ..
            } => {
                if self.orders.contains_key(&order_id) {
                    // re-used live id: treat as a format violation on the order field
                    return Err(TapeError::FieldRange {
                        kind: 'A',
                        field: "order_id already live",
                    });
                }
                let price = price as i64;
                self.orders.insert(
                    order_id,
                    RestingOrder {
                        side,
                        price,
                        remaining: shares,
                    },
                );
                *self.levels_mut(side).entry(price).or_insert(0) += shares as u64;
                self.check_uncrossed()?;
                Ok(Applied::None)
            }
            TapeMessage::Cancel {
                order_id, shares, ..
            } => {
                self.reduce(order_id, shares, 'X')?;
                Ok(Applied::None)
            }
            TapeMessage::Delete { order_id, .. } => {
                let order = self
                    .orders
                    .get(&order_id)
                    .copied()
                    .ok_or(TapeError::UnknownOrder(order_id))?;
                self.reduce(order_id, order.remaining, 'D')?;
                Ok(Applied::None)
            }
            TapeMessage::Execute {
                order_id, shares, ..
            } => {
                // snapshot mid/spread before the trade
                let pre_mid = self.mid_half();
                let pre_spread = self.spread();
                let at_best = self
                    .orders
                    .get(&order_id)
                    .map(|o| match o.side {
                        Side::Bid => self.best_bid() == Some(o.price),
                        Side::Ask => self.best_ask() == Some(o.price),
                    })
                    .unwrap_or(false);
                let order = self.reduce(order_id, shares, 'E')?;
                match (pre_mid, pre_spread) {
                    (Some(mid), Some(spread)) if at_best => Ok(Applied::Trade(Fill {
                        passive_side: order.side,
                        volume: shares,
                        price: order.price,
                        pre_mid_half: mid,
                        pre_spread: spread,
                    })),
                    (Some(_), Some(_)) => Ok(Applied::Cleaned(CleanReason::AwayFromBest)),
                    _ => Ok(Applied::Cleaned(CleanReason::OneSidedBook)),
                }
            }
        }
    }
}
