//! Market-microstructure analytics on an event-clock trade tape.
//!
//! The crate decodes MLOB binary tapes into order-book events, reconstructs
//! the book, and extracts the trade tape (one event per visible execution at
//! the best quote). On top of that tape it provides:
//!
//! * exact clearing ledgers and the three-term wealth decomposition
//!   (frictionless / transaction-cost / adverse-selection) — [`ledger`]
//! * price-impact classification and spread-vs-adverse-selection
//!   comparisons — [`impact`]
//! * the bucketed quadratic-covariation test for adverse selection — [`hftest`]
//! * parent-order reconstruction and convex book-walking costs — [`parent`]
//! * numerical verification of the vanishing-spread diffusion limit — [`limits`]
//! * friction-adjusted Black–Scholes pricing and replication — [`pricing`]
//! * a synthetic tape generator with known ground truth — [`simgen`]
//!
//! # Units
//!
//! Quote prices are integers in 10⁻⁴ currency units end to end. Midprices can
//! sit on half such a unit, so mids, cash and wealth are carried as integer
//! *half-units* (1 half-unit = 5·10⁻⁵ currency): `mid_half = bid + ask`.
//! Spreads stay in 10⁻⁴ units (`spread = ask − bid`); the half-spread cost of
//! trading `v` shares is then exactly `spread · v` half-units. All ledger
//! identities hold with integer arithmetic, no floating point.

pub mod hftest;
pub mod impact;
pub mod ledger;
pub mod limits;
pub mod parent;
pub mod pricing;
pub mod simgen;
pub mod stats;
pub mod tape;
