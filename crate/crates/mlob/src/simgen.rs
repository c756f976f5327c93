//! Synthetic market generator with known ground truth.
//!
//! Each trade is informed with probability `informed_fraction` (the taker
//! trades just before the mid moves one tick in her direction, so
//! `Δp·ΔL_active > 0` by construction) or noise otherwise (direction ±1
//! with equal probability; the mid then moves ±1 tick with probability
//! `q/2` each or stays put, so `E[Δp·ΔL] = 0` and zero-impact trades occur
//! through the price grid). Quotes are realized as resting anchor orders
//! and every execution happens at the best quote, so generated streams
//! satisfy all tape-module invariants. Identical configs produce
//! bit-identical tapes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::tape::{Side, TapeMessage};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// Experimental: a trader who knows a terminal price level rather than the
/// next increment. Directions steer toward the target, impact behaves like
/// noise. No statistics are asserted for this agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsiderConfig {
    /// Fraction of trades taken by the insider (carved out of the noise share).
    pub fraction: f64,
    /// Mid level (10⁻⁴ units) the insider believes the price converges to.
    pub target_mid_e4: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub n_trades: usize,
    /// Tick size in 10⁻⁴ currency units.
    pub tick_e4: i64,
    /// Constant spread in ticks (≥ 1).
    pub spread_ticks: i64,
    /// Initial mid in 10⁻⁴ units; the realized bid is
    /// `initial_mid − spread/2` rounded down to a whole unit.
    pub initial_mid_e4: i64,
    /// φ ∈ [0,1]: probability a trade is informed.
    pub informed_fraction: f64,
    /// q ∈ [0,1]: probability the mid moves after a noise trade.
    pub noise_move_prob: f64,
    /// Uniform trade volume range (shares), inclusive.
    pub volume_range: (u32, u32),
    /// When ≥ 2, each trade is printed as that many same-timestamp child
    /// executions against the same resting order.
    pub split_children: u32,
    pub insider: Option<InsiderConfig>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_trades: 1000,
            tick_e4: 100,
            spread_ticks: 1,
            initial_mid_e4: 1_000_000, // 100.00
            informed_fraction: 0.3,
            noise_move_prob: 0.2,
            volume_range: (100, 100),
            split_children: 1,
            insider: None,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        let err = |m: &str| Err(SimError::InvalidConfig(m.into()));
        if self.n_trades == 0 {
            return err("n_trades must be >= 1");
        }
        if self.tick_e4 <= 0 {
            return err("tick must be positive");
        }
        if self.spread_ticks < 1 {
            return err("spread must be at least one tick");
        }
        if !(0.0..=1.0).contains(&self.informed_fraction) {
            return err("informed_fraction must be in [0,1]");
        }
        if !(0.0..=1.0).contains(&self.noise_move_prob) {
            return err("noise_move_prob must be in [0,1]");
        }
        if self.volume_range.0 == 0 || self.volume_range.0 > self.volume_range.1 {
            return err("volume range must be 1 <= min <= max");
        }
        if self.split_children == 0 {
            return err("split_children must be >= 1");
        }
        if let Some(ins) = &self.insider {
            if !(0.0..=1.0).contains(&ins.fraction)
                || ins.fraction + self.informed_fraction > 1.0
            {
                return err("insider fraction must fit in [0, 1 - informed_fraction]");
            }
        }
        let spread_e4 = self.spread_ticks * self.tick_e4;
        if self.initial_mid_e4 - spread_e4 / 2 <= self.tick_e4 * 4 {
            return err("initial mid too close to zero for the spread");
        }
        // every reachable quote must fit the 32-bit wire price
        let reach = self.initial_mid_e4 + spread_e4 + self.n_trades as i64 * self.tick_e4;
        if reach > u32::MAX as i64 {
            return err("price grid can exceed the 32-bit wire range");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraderKind {
    Informed,
    Noise,
    Insider,
}

/// Per-trade generator label: who traded, which way, and how the mid moved
/// before the next trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TradeLabel {
    pub n: u32,
    pub kind: TraderKind,
    /// +1 active buy, −1 active sell.
    pub direction: i8,
    pub volume: u32,
    /// Mid move after the trade, in ticks.
    pub mid_move_ticks: i8,
}

#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    pub labels: Vec<TradeLabel>,
}

impl GroundTruth {
    pub fn informed_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| l.kind == TraderKind::Informed)
            .count()
    }
}

struct QuoteDriver {
    messages: Vec<TapeMessage>,
    locate: u16,
    bid: i64,
    ask: i64,
    bid_anchor: u64,
    ask_anchor: u64,
    next_order_id: u64,
    next_match_id: u64,
}

const ANCHOR_SHARES: u32 = 1 << 30;

impl QuoteDriver {
    fn new(locate: u16, symbol: [u8; 8], bid: i64, ask: i64) -> Self {
        let mut d = QuoteDriver {
            messages: vec![TapeMessage::Directory { locate, symbol }],
            locate,
            bid,
            ask,
            bid_anchor: 0,
            ask_anchor: 0,
            next_order_id: 1,
            next_match_id: 1,
        };
        d.bid_anchor = d.add(0, Side::Bid, ANCHOR_SHARES, bid);
        d.ask_anchor = d.add(0, Side::Ask, ANCHOR_SHARES, ask);
        d
    }

    fn add(&mut self, ts: u64, side: Side, shares: u32, price: i64) -> u64 {
        let order_id = self.next_order_id;
        self.next_order_id += 1;
        self.messages.push(TapeMessage::Add {
            locate: self.locate,
            timestamp_ns: ts,
            order_id,
            side,
            shares,
            price: price as u32,
        });
        order_id
    }

    fn delete(&mut self, ts: u64, order_id: u64) {
        self.messages.push(TapeMessage::Delete {
            locate: self.locate,
            timestamp_ns: ts,
            order_id,
        });
    }

    fn execute(&mut self, ts: u64, order_id: u64, shares: u32) {
        let match_id = self.next_match_id;
        self.next_match_id += 1;
        self.messages.push(TapeMessage::Execute {
            locate: self.locate,
            timestamp_ns: ts,
            order_id,
            shares,
            match_id,
        });
    }

    /// Prints one trade at the best quote: a fresh passive order of exactly
    /// the trade volume, then one or more executions against it at the same
    /// timestamp.
    fn trade(&mut self, ts: u64, direction: i8, volume: u32, children: u32) {
        let (passive_side, price) = if direction > 0 {
            (Side::Ask, self.ask)
        } else {
            (Side::Bid, self.bid)
        };
        let order = self.add(ts, passive_side, volume, price);
        let children = children.min(volume).max(1);
        let base = volume / children;
        let mut remainder = volume % children;
        let mut left = volume;
        for _ in 0..children {
            let mut lot = base;
            if remainder > 0 {
                lot += 1;
                remainder -= 1;
            }
            self.execute(ts, order, lot);
            left -= lot;
        }
        debug_assert_eq!(left, 0);
    }

    /// Moves both quotes by a signed number of ticks, never crossing:
    /// the receding side moves first.
    fn move_quotes(&mut self, ts: u64, ticks: i64, tick_e4: i64) {
        if ticks == 0 {
            return;
        }
        let delta = ticks * tick_e4;
        let (new_bid, new_ask) = (self.bid + delta, self.ask + delta);
        if delta > 0 {
            self.delete(ts, self.ask_anchor);
            self.ask_anchor = self.add(ts, Side::Ask, ANCHOR_SHARES, new_ask);
            self.delete(ts, self.bid_anchor);
            self.bid_anchor = self.add(ts, Side::Bid, ANCHOR_SHARES, new_bid);
        } else {
            self.delete(ts, self.bid_anchor);
            self.bid_anchor = self.add(ts, Side::Bid, ANCHOR_SHARES, new_bid);
            self.delete(ts, self.ask_anchor);
            self.ask_anchor = self.add(ts, Side::Ask, ANCHOR_SHARES, new_ask);
        }
        self.bid = new_bid;
        self.ask = new_ask;
    }

    fn mid_half(&self) -> i64 {
        self.bid + self.ask
    }
}

/// Generates an MLOB message stream realizing the toy model, with per-trade
/// ground-truth labels.
pub fn generate_tape(config: &SimConfig) -> Result<(Vec<TapeMessage>, GroundTruth), SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let spread_e4 = config.spread_ticks * config.tick_e4;
    let bid0 = config.initial_mid_e4 - spread_e4 / 2;
    let mut driver = QuoteDriver::new(1, *b"SIM     ", bid0, bid0 + spread_e4);
    let mut truth = GroundTruth::default();

    for n in 0..config.n_trades {
        let ts = (n as u64 + 1) * 1_000_000;
        let volume = rng.random_range(config.volume_range.0..=config.volume_range.1);
        let u: f64 = rng.random();
        let insider_frac = config.insider.map(|i| i.fraction).unwrap_or(0.0);
        let (kind, direction) = if u < config.informed_fraction {
            (TraderKind::Informed, if rng.random::<bool>() { 1i8 } else { -1 })
        } else if u < config.informed_fraction + insider_frac {
            let ins = config.insider.unwrap();
            let dir = if 2 * ins.target_mid_e4 >= driver.mid_half() {
                1i8
            } else {
                -1
            };
            (TraderKind::Insider, dir)
        } else {
            (TraderKind::Noise, if rng.random::<bool>() { 1i8 } else { -1 })
        };
        driver.trade(ts, direction, volume, config.split_children);
        let move_ticks: i8 = match kind {
            TraderKind::Informed => direction,
            TraderKind::Noise | TraderKind::Insider => {
                let v: f64 = rng.random();
                if v < config.noise_move_prob / 2.0 {
                    1
                } else if v < config.noise_move_prob {
                    -1
                } else {
                    0
                }
            }
        };
        // price floor: never move the bid to or below zero
        let move_ticks = if driver.bid + (move_ticks as i64) * config.tick_e4 <= 0 {
            0
        } else {
            move_ticks
        };
        driver.move_quotes(ts + 500_000, move_ticks as i64, config.tick_e4);
        truth.labels.push(TradeLabel {
            n: n as u32 + 1,
            kind,
            direction,
            volume,
            mid_move_ticks: move_ticks,
        });
    }
    Ok((driver.messages, truth))
}

/// Correlated diffusion increments for feeding the covariation test
/// directly, bypassing the book.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionConfig {
    /// Number of increments on the uniform grid over `[0, horizon]`.
    pub n: usize,
    /// Instantaneous correlation between price and inventory noise.
    pub rho: f64,
    pub sigma: f64,
    pub vol_l: f64,
    pub horizon: f64,
    pub seed: u64,
}

/// Samples `(Δ_n p, Δ_n L)` with the target correlation: the sample
/// correlation converges to `rho` as `n` grows.
pub fn diffusion_increments(config: &DiffusionConfig) -> Result<Vec<(f64, f64)>, SimError> {
    if config.n == 0 || !(-1.0..=1.0).contains(&config.rho) {
        return Err(SimError::InvalidConfig(
            "need n >= 1 and rho in [-1, 1]".into(),
        ));
    }
    if config.sigma < 0.0 || config.vol_l < 0.0 || config.horizon <= 0.0 {
        return Err(SimError::InvalidConfig(
            "volatilities must be nonnegative and horizon positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sqrt_dt = (config.horizon / config.n as f64).sqrt();
    let ortho = (1.0 - config.rho * config.rho).sqrt();
    Ok((0..config.n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let dp = config.sigma * sqrt_dt * z1;
            let dl = config.vol_l * sqrt_dt * (config.rho * z1 + ortho * z2);
            (dp, dl)
        })
        .collect())
}
