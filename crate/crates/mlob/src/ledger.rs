//! Clearing equations and exact wealth ledgers.
//!
//! Cash moves by the clearing rule `ΔK = −p·ΔL ± (s/2)·|ΔL|`, with `+` for
//! limit-order fills (the half-spread is captured) and `−` for market orders
//! (it is paid). Wealth `X = L·p + K` marked to the mid then changes by
//! `ΔX = L·Δp ± (s/2)·|ΔL| + Δp·ΔL`, which splits into the frictionless
//! term, the transaction-cost term and the adverse-selection term.
//!
//! Everything here is integer arithmetic in half-units (see crate docs):
//! the decomposition identity `X_{n+1} − X_1 = F_n + T_n + A_n` holds with
//! zero tolerance on every tape.

use thiserror::Error;

use crate::tape::{Side, TradeTape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Limit,
    Market,
}

impl OrderKind {
    /// Sign of the transaction-cost term: spread captured (+) by limit
    /// orders, paid (−) by market orders.
    pub fn cost_sign(self) -> i64 {
        match self {
            OrderKind::Limit => 1,
            OrderKind::Market => -1,
        }
    }
}

/// The five clearing cases of a single trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClearingCase {
    BuyMarket,
    SellMarket,
    BuyLimit,
    SellLimit,
    NoTrade,
}

/// Whose ledger to run: every tape trade booked as the aggregate passive
/// trader's limit-order fill, or its active market-order mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Perspective {
    #[default]
    AggregatePassive,
    AggregateActive,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("inventory change {dl} inconsistent with clearing case {case:?}")]
    SignMismatch { case: ClearingCase, dl: i64 },
}

/// Cash change of one trade, in half-units. `mid_half` is the pre-trade mid
/// (half-units), `spread` the pre-trade spread (10⁻⁴ units), `dl` the signed
/// inventory change in shares.
pub fn clearing_cash_delta(
    case: ClearingCase,
    mid_half: i64,
    spread: i64,
    dl: i64,
) -> Result<i64, LedgerError> {
    let ok = match case {
        ClearingCase::BuyMarket | ClearingCase::BuyLimit => dl > 0,
        ClearingCase::SellMarket | ClearingCase::SellLimit => dl < 0,
        ClearingCase::NoTrade => dl == 0,
    };
    if !ok {
        return Err(LedgerError::SignMismatch { case, dl });
    }
    let kind_sign = match case {
        ClearingCase::BuyLimit | ClearingCase::SellLimit => 1,
        ClearingCase::BuyMarket | ClearingCase::SellMarket => -1,
        ClearingCase::NoTrade => return Ok(0),
    };
    Ok(-mid_half * dl + kind_sign * spread * dl.abs())
}

/// Wealth change of one trade, in half-units:
/// `ΔX = L·Δp ± (s/2)|ΔL| + Δp·ΔL`, `+` iff limit order.
pub fn wealth_delta_exact(
    inventory: i64,
    dp_half: i64,
    spread: i64,
    dl: i64,
    kind: OrderKind,
) -> i64 {
    inventory * dp_half + kind.cost_sign() * spread * dl.abs() + dp_half * dl
}

/// One row of the per-trade ledger; `n = 1..=N+1`, all monetary values in
/// half-units, inventory and cash taken *before* trade `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerRow {
    pub n: u32,
    pub mid_half: i64,
    pub spread: Option<i64>,
    pub inventory: i64,
    pub cash_half: i64,
    pub wealth_half: i64,
}

#[derive(Debug, Clone)]
pub struct LedgerSeries {
    pub perspective: Perspective,
    pub rows: Vec<LedgerRow>,
}

impl LedgerSeries {
    pub fn final_wealth_half(&self) -> i64 {
        self.rows.last().map(|r| r.wealth_half).unwrap_or(0)
    }
}

/// Runs the exact ledger over a tape starting from `L_1 = K_1 = 0`.
/// Row `n` marks the book before trade `n`; the final row marks at the mid
/// after the last trade. `X = L·p + K` holds exactly on every row.
pub fn run_ledger(tape: &TradeTape, perspective: Perspective) -> LedgerSeries {
    let mut rows = Vec::with_capacity(tape.len() + 1);
    let mut inventory = 0i64;
    let mut cash = 0i64;
    for (i, trade) in tape.trades.iter().enumerate() {
        let dl = match perspective {
            Perspective::AggregatePassive => trade.delta_l_passive(),
            Perspective::AggregateActive => trade.delta_l_active(),
        };
        let cost_sign = match perspective {
            Perspective::AggregatePassive => 1,
            Perspective::AggregateActive => -1,
        };
        rows.push(LedgerRow {
            n: trade.n,
            mid_half: trade.pre_mid_half,
            spread: Some(trade.pre_spread),
            inventory,
            cash_half: cash,
            wealth_half: inventory * trade.pre_mid_half + cash,
        });
        cash += -trade.pre_mid_half * dl + cost_sign * trade.cost_half();
        inventory += dl;
        if i + 1 == tape.len() {
            let end_mid = tape.mid_after(i);
            rows.push(LedgerRow {
                n: trade.n + 1,
                mid_half: end_mid,
                spread: tape.end_spread,
                inventory,
                cash_half: cash,
                wealth_half: inventory * end_mid + cash,
            });
        }
    }
    LedgerSeries { perspective, rows }
}

/// The three wealth models compared in the empirical analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WealthModel {
    /// `ΔX = L·Δp` only.
    Frictionless,
    /// `ΔX = L·Δp ± (s/2)|ΔL|`.
    WithTransactionCosts,
    /// All three terms; coincides with the exact ledger.
    Complete,
}

/// Cumulative wealth path `X_1..X_{N+1}` (half-units, `X_1 = 0`) under one
/// of the three models. Inventory follows the actual trades in all models;
/// only the wealth accounting differs.
pub fn wealth_model_series(
    tape: &TradeTape,
    model: WealthModel,
    perspective: Perspective,
) -> Vec<i64> {
    let cost_sign = match perspective {
        Perspective::AggregatePassive => 1,
        Perspective::AggregateActive => -1,
    };
    let mut series = Vec::with_capacity(tape.len() + 1);
    series.push(0i64);
    let mut wealth = 0i64;
    let mut inventory = 0i64;
    for (i, trade) in tape.trades.iter().enumerate() {
        let dl = match perspective {
            Perspective::AggregatePassive => trade.delta_l_passive(),
            Perspective::AggregateActive => trade.delta_l_active(),
        };
        let dp = tape.mid_after(i) - trade.pre_mid_half;
        wealth += inventory * dp;
        if matches!(model, WealthModel::WithTransactionCosts | WealthModel::Complete) {
            wealth += cost_sign * trade.cost_half();
        }
        if matches!(model, WealthModel::Complete) {
            wealth += dp * dl;
        }
        inventory += dl;
        series.push(wealth);
    }
    series
}

/// Cumulative decomposition of the aggregate passive trader's wealth:
/// frictionless `F_n = Σ L_k Δ_k p`, transaction cost `T_n = Σ (s_k/2)|Δ_k L|`
/// and adverse selection `A_n = Σ Δ_k p Δ_k L`, all in half-units with the
/// passive sign convention.
#[derive(Debug, Clone, Default)]
pub struct WealthDecomposition {
    pub frictionless: Vec<i64>,
    pub transaction_cost: Vec<i64>,
    pub adverse_selection: Vec<i64>,
}

impl WealthDecomposition {
    pub fn len(&self) -> usize {
        self.frictionless.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frictionless.is_empty()
    }

    pub fn final_frictionless(&self) -> i64 {
        *self.frictionless.last().unwrap_or(&0)
    }

    pub fn final_transaction_cost(&self) -> i64 {
        *self.transaction_cost.last().unwrap_or(&0)
    }

    pub fn final_adverse_selection(&self) -> i64 {
        *self.adverse_selection.last().unwrap_or(&0)
    }

    /// `F_n + T_n + A_n`, which equals `X_{n+1} − X_1` exactly.
    pub fn total_at(&self, idx: usize) -> i64 {
        self.frictionless[idx] + self.transaction_cost[idx] + self.adverse_selection[idx]
    }
}

/// Decomposes the passive trader's wealth changes term by term.
pub fn decompose(tape: &TradeTape) -> WealthDecomposition {
    let mut out = WealthDecomposition::default();
    let mut inventory = 0i64;
    let (mut f, mut t, mut a) = (0i64, 0i64, 0i64);
    for (i, trade) in tape.trades.iter().enumerate() {
        let dl = trade.delta_l_passive();
        let dp = tape.mid_after(i) - trade.pre_mid_half;
        f += inventory * dp;
        t += trade.cost_half();
        a += dp * dl;
        inventory += dl;
        out.frictionless.push(f);
        out.transaction_cost.push(t);
        out.adverse_selection.push(a);
    }
    out
}

/// End-of-day summary of the mispricing of the frictionless model and the
/// weight of adverse selection against transaction costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table2Metrics {
    /// `|F_N − net| / |net|`; `None` when the net P&L is zero.
    pub relative_error: Option<f64>,
    /// `|A_N| / T_N` with the passive '+' sign; `None` when `T_N = 0`.
    /// Can exceed 1.
    pub friction_ratio: Option<f64>,
    /// Exact end-of-day wealth of the aggregate passive trader, currency.
    pub net_pnl: f64,
    pub net_pnl_half: i64,
}

/// Relative-error basis: end-of-day values, or the supremum of the gap over
/// the day against the largest wealth excursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorBasis {
    #[default]
    EndOfDay,
    SupOverDay,
}

pub fn table2_metrics(tape: &TradeTape, basis: ErrorBasis) -> Table2Metrics {
    let decomp = decompose(tape);
    let net_half = if decomp.is_empty() {
        0
    } else {
        decomp.total_at(decomp.len() - 1)
    };
    let relative_error = match basis {
        ErrorBasis::EndOfDay => {
            if net_half == 0 || decomp.is_empty() {
                None
            } else {
                Some(
                    (decomp.final_frictionless() - net_half).abs() as f64 / net_half.abs() as f64,
                )
            }
        }
        ErrorBasis::SupOverDay => {
            let mut sup_gap = 0i64;
            let mut sup_net = 0i64;
            for i in 0..decomp.len() {
                sup_gap = sup_gap.max((decomp.frictionless[i] - decomp.total_at(i)).abs());
                sup_net = sup_net.max(decomp.total_at(i).abs());
            }
            if sup_net == 0 {
                None
            } else {
                Some(sup_gap as f64 / sup_net as f64)
            }
        }
    };
    let t_n = decomp.final_transaction_cost();
    let friction_ratio = if t_n == 0 {
        None
    } else {
        Some(decomp.final_adverse_selection().abs() as f64 / t_n as f64)
    };
    Table2Metrics {
        relative_error,
        friction_ratio,
        net_pnl: net_half as f64 / 2e4,
        net_pnl_half: net_half,
    }
}

/// Maps a tape trade to its clearing case from one perspective.
pub fn case_of(passive_side: Side, perspective: Perspective) -> ClearingCase {
    match (perspective, passive_side) {
        (Perspective::AggregatePassive, Side::Bid) => ClearingCase::BuyLimit,
        (Perspective::AggregatePassive, Side::Ask) => ClearingCase::SellLimit,
        (Perspective::AggregateActive, Side::Bid) => ClearingCase::SellMarket,
        (Perspective::AggregateActive, Side::Ask) => ClearingCase::BuyMarket,
    }
}
