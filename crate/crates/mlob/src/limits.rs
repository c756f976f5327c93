//! Numerical verification of the vanishing-spread diffusion limit.
//!
//! Prices and inventories are correlated Itô processes sampled on the grid
//! `{1/N, …, 1}`; the physical spread at resolution `N` is `s/√N`. The
//! discrete clearing equation
//!
//! ```text
//! Δ_n X = L_n Δ_n p ± (s/(2√N)) |Δ_n L| + Δ_n p Δ_n L
//! ```
//!
//! then converges to `dX = L dp ± (s·l/√(2π)) dt + d[L,p]` — spread
//! captured (+) in the liquidity-provider regime `ρ < 0`, paid (−) in the
//! taker regime. The module simulates pairs, evaluates both sides, checks
//! the functional law of large numbers behind the spread term, and measures
//! convergence rates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::stats::{ols_slope, quantile_sorted};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LimitsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("integrand grows faster than quadratically; the Gaussian limit integral is unreliable")]
    GrowthViolation,
}

/// Constant coefficients of the price/inventory pair
/// `dp = μ dt + σ dW`, `dL = b dt + l dW'`, `corr(W, W') = ρ`,
/// with spread process `s` (already in the price-change unit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub mu: f64,
    pub sigma: f64,
    pub drift_l: f64,
    pub vol_l: f64,
    pub rho: f64,
    pub spread: f64,
    pub p0: f64,
    pub l0: f64,
    pub horizon: f64,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            mu: 0.0,
            sigma: 1.0,
            drift_l: 0.0,
            vol_l: 1.0,
            rho: -0.5,
            spread: 1.0,
            p0: 0.0,
            l0: 0.0,
            horizon: 1.0,
        }
    }
}

impl DiffusionParams {
    fn validate(&self) -> Result<(), LimitsError> {
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(LimitsError::InvalidParams("rho must be in [-1, 1]".into()));
        }
        if self.sigma < 0.0 || self.vol_l < 0.0 {
            return Err(LimitsError::InvalidParams(
                "volatilities must be nonnegative".into(),
            ));
        }
        if self.horizon <= 0.0 {
            return Err(LimitsError::InvalidParams("horizon must be positive".into()));
        }
        Ok(())
    }
}

/// A sampled pair of paths, stored as increments on the uniform grid.
#[derive(Debug, Clone)]
pub struct DiffusionPair {
    pub params: DiffusionParams,
    pub n: usize,
    pub dp: Vec<f64>,
    pub dl: Vec<f64>,
}

impl DiffusionPair {
    pub fn price_path(&self) -> Vec<f64> {
        prefix(self.params.p0, &self.dp)
    }

    pub fn inventory_path(&self) -> Vec<f64> {
        prefix(self.params.l0, &self.dl)
    }

    /// Coarsens the pair by summing blocks of `factor` increments; the
    /// coarse pair discretizes the same underlying paths.
    pub fn subsample(&self, factor: usize) -> DiffusionPair {
        assert!(factor > 0 && self.n % factor == 0);
        let sum_blocks = |v: &[f64]| {
            v.chunks(factor)
                .map(|c| c.iter().sum::<f64>())
                .collect::<Vec<f64>>()
        };
        DiffusionPair {
            params: self.params,
            n: self.n / factor,
            dp: sum_blocks(&self.dp),
            dl: sum_blocks(&self.dl),
        }
    }
}

fn prefix(start: f64, increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(start);
    let mut acc = start;
    for d in increments {
        acc += d;
        out.push(acc);
    }
    out
}

/// Euler–Maruyama sampling with exact Gaussian increments (the coefficients
/// are constant, so the scheme is exact in law). Deterministic under seed.
pub fn simulate_pair(
    params: &DiffusionParams,
    n: usize,
    seed: u64,
) -> Result<DiffusionPair, LimitsError> {
    params.validate()?;
    if n < 2 {
        return Err(LimitsError::InvalidParams("need n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = params.horizon / n as f64;
    let sqrt_dt = dt.sqrt();
    let ortho = (1.0 - params.rho * params.rho).sqrt();
    let mut dp = Vec::with_capacity(n);
    let mut dl = Vec::with_capacity(n);
    for _ in 0..n {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        dp.push(params.mu * dt + params.sigma * sqrt_dt * z1);
        dl.push(params.drift_l * dt + params.vol_l * sqrt_dt * (params.rho * z1 + ortho * z2));
    }
    Ok(DiffusionPair {
        params: *params,
        n,
        dp,
        dl,
    })
}

/// Which side of the book the simulated trader stands on; fixes the sign of
/// the spread term in the discrete equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraderRole {
    Provider,
    Taker,
}

impl TraderRole {
    pub fn spread_sign(self) -> f64 {
        match self {
            TraderRole::Provider => 1.0,
            TraderRole::Taker => -1.0,
        }
    }

    /// Regime selected by the sign of ρ: providers accumulate negative
    /// covariation, takers positive; ρ = 0 counts as taker (market orders).
    pub fn from_rho(rho: f64) -> TraderRole {
        if rho < 0.0 {
            TraderRole::Provider
        } else {
            TraderRole::Taker
        }
    }
}

/// Cumulative discrete wealth `X^N` (length `n+1`, starts at 0) using the
/// vanishing spread `s/√N`.
pub fn discrete_wealth(pair: &DiffusionPair, role: TraderRole) -> Vec<f64> {
    // s·√dt equals the s/√N scaling on the unit-horizon grid and keeps the
    // limit s·l·T/√(2π) for any horizon
    let spread_n = pair.params.spread * (pair.params.horizon / pair.n as f64).sqrt();
    let sign = role.spread_sign();
    let mut x = Vec::with_capacity(pair.n + 1);
    x.push(0.0);
    let mut inventory = pair.params.l0;
    let mut acc = 0.0;
    for k in 0..pair.n {
        acc += inventory * pair.dp[k]
            + sign * 0.5 * spread_n * pair.dl[k].abs()
            + pair.dp[k] * pair.dl[k];
        inventory += pair.dl[k];
        x.push(acc);
    }
    x
}

/// Terminal wealth of the continuous-time clearing equation
/// `dX = L dp + (ρσ ± s/√(2π)) l dt` evaluated on the pair's grid: the Itô
/// integral by its (fine-grid) sum, the dt terms by trapezoidal quadrature.
/// The ± branch is selected by the sign of ρ: '+' for ρ < 0 (provider
/// regime), '−' otherwise (the ρ = 0 boundary trades with market orders).
pub fn continuous_wealth(pair: &DiffusionPair) -> f64 {
    let p = &pair.params;
    let role = TraderRole::from_rho(p.rho);
    let drift_rate =
        (p.rho * p.sigma + role.spread_sign() * p.spread / (2.0 * std::f64::consts::PI).sqrt())
            * p.vol_l;
    let mut ito = 0.0;
    let mut inventory = p.l0;
    for k in 0..pair.n {
        ito += inventory * pair.dp[k];
        inventory += pair.dl[k];
    }
    // constant integrand: trapezoid is exact
    ito + drift_rate * p.horizon
}

/// Discrete-vs-continuous comparison at one resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitComparison {
    pub n: usize,
    pub discrete: f64,
    pub continuous: f64,
    pub abs_error: f64,
}

/// Compares the discrete wealth at resolution `n` (a coarsening of `fine`)
/// with the continuous wealth evaluated on the fine grid. The role is
/// selected from the sign of ρ so both sides describe the same trader.
pub fn compare_at(fine: &DiffusionPair, n: usize) -> Result<LimitComparison, LimitsError> {
    if n < 2 || fine.n % n != 0 {
        return Err(LimitsError::InvalidParams(format!(
            "coarse resolution {n} must divide the fine grid {}",
            fine.n
        )));
    }
    let role = TraderRole::from_rho(fine.params.rho);
    let coarse = fine.subsample(fine.n / n);
    let discrete = *discrete_wealth(&coarse, role).last().unwrap();
    let continuous = continuous_wealth(fine);
    Ok(LimitComparison {
        n,
        discrete,
        continuous,
        abs_error: (discrete - continuous).abs(),
    })
}

/// Result of the functional-LLN check
/// `(1/N) Σ F(√N Δ_n Y) → T · ∫ F(y) φ_{σ²}(y) dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlnResult {
    pub discrete_sum: f64,
    pub limit_integral: f64,
    pub abs_error: f64,
}

/// Verifies the law of large numbers for a discretized Brownian path with
/// volatility `sigma_y` over `[0, horizon]`. The limit integral is computed
/// by Simpson quadrature on `[−10σ, 10σ]` (node count odd, symmetric, so a
/// kink at 0 sits on a node). Integrands growing visibly faster than `y²`
/// in the Gaussian tail are rejected.
pub fn verify_lln(
    f: impl Fn(f64) -> f64,
    sigma_y: f64,
    horizon: f64,
    n: usize,
    seed: u64,
) -> Result<LlnResult, LimitsError> {
    if sigma_y <= 0.0 || horizon <= 0.0 || n < 2 {
        return Err(LimitsError::InvalidParams(
            "need sigma_y > 0, horizon > 0, n >= 2".into(),
        ));
    }
    // growth probe: for F ≤ C·y² the ratio F(y)/y² stops growing in the
    // tail; a ratio still climbing by 2x across [6σ, 12σ] flags
    // super-quadratic growth
    let probe: Vec<f64> = (6..=12)
        .map(|k| {
            let y = k as f64 * sigma_y;
            f(y).abs().max(f(-y).abs()) / (y * y)
        })
        .collect();
    if probe.windows(2).all(|w| w[1] > w[0]) && probe[6] > 2.0 * probe[0] {
        return Err(LimitsError::GrowthViolation);
    }

    // n is the per-unit-time resolution: dt = 1/n, so √n·ΔY ~ N(0, σ_y²)
    // and the grid carries ⌊n·horizon⌋ steps
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = ((n as f64 * horizon).round() as usize).max(1);
    let dt = 1.0 / n as f64;
    let scale = (n as f64).sqrt();
    let mut sum = 0.0;
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        let dy = sigma_y * dt.sqrt() * z;
        sum += f(scale * dy);
    }
    let discrete_sum = sum / n as f64;

    let sd = sigma_y;
    let half_width = 10.0 * sd;
    let m = 4001usize;
    let h = 2.0 * half_width / (m - 1) as f64;
    let phi = |y: f64| (-(y * y) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let mut integral = 0.0;
    for i in 0..m {
        let y = -half_width + i as f64 * h;
        let w = if i == 0 || i == m - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        integral += w * f(y) * phi(y);
    }
    integral *= h / 3.0;
    let limit_integral = horizon * integral;
    Ok(LlnResult {
        discrete_sum,
        limit_integral,
        abs_error: (discrete_sum - limit_integral).abs(),
    })
}

/// Per-resolution error quartiles over replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub median_error: f64,
    pub q25: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Fitted decay exponent: `median_error ~ N^{-rate}` (positive when
    /// errors shrink).
    pub loglog_rate: f64,
}

/// Fine-grid oversampling factor used as the reference resolution.
const FINE_FACTOR: usize = 16;

/// Runs `replications` independent paths; for each, evaluates the discrete
/// wealth at every requested resolution against the continuous wealth on a
/// 16x finer reference grid, and reports median/quartile absolute errors
/// with a log-log rate fit. Deterministic for fixed (seed, replication).
pub fn convergence_study(
    params: &DiffusionParams,
    n_list: &[usize],
    replications: usize,
    seed: u64,
) -> Result<ConvergenceStudy, LimitsError> {
    params.validate()?;
    if n_list.is_empty() || replications == 0 {
        return Err(LimitsError::InvalidParams(
            "need resolutions and replications".into(),
        ));
    }
    let n_max = *n_list.iter().max().unwrap();
    let fine_n = n_max
        .checked_mul(FINE_FACTOR)
        .ok_or_else(|| LimitsError::InvalidParams("resolution overflow".into()))?;
    for &n in n_list {
        if n < 2 || fine_n % n != 0 {
            return Err(LimitsError::InvalidParams(format!(
                "every resolution must be >= 2 and divide {fine_n}; {n} does not"
            )));
        }
    }
    let errors: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let fine = simulate_pair(params, fine_n, seed.wrapping_add(rep as u64))
                .expect("params validated");
            n_list
                .iter()
                .map(|&n| compare_at(&fine, n).expect("divisibility checked").abs_error)
                .collect()
        })
        .collect();
    let rows: Vec<ConvergenceRow> = n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let mut errs: Vec<f64> = errors.iter().map(|e| e[j]).collect();
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ConvergenceRow {
                n,
                median_error: quantile_sorted(&errs, 0.5),
                q25: quantile_sorted(&errs, 0.25),
                q75: quantile_sorted(&errs, 0.75),
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.median_error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.median_error.ln()))
        .collect();
    let loglog_rate = if pts.len() >= 2 { -ols_slope(&pts) } else { 0.0 };
    Ok(ConvergenceStudy { rows, loglog_rate })
}
