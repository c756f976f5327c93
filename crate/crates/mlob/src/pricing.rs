//! Friction-adjusted Black–Scholes pricing, hedging and replication.
//!
//! With a spread proportional to price volatility, `s_t = s·σ·p_t`, a
//! European option value solves
//!
//! ```text
//! v_t + (σ²p²/2)(√(2/π)·s − 1)·v_pp + r·p·v_p = r·v
//! ```
//!
//! i.e. plain Black–Scholes at the effective volatility
//! `σ_eff = σ·√(√(2/π)·s − 1)`. The diffusion coefficient is positive only
//! for `s > √(π/2)`; below that the problem is ill-posed and refused.
//! The delta hedge still replicates, but the *order type* is pinned by the
//! sign of the inventory volatility `l_t = σ·p_t·∂²v/∂p²`: negative-gamma
//! exposures rebalance with limit orders, positive-gamma with market orders.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::ledger::OrderKind;
use crate::stats::normal_cdf;

pub const SQRT_2_OVER_PI: f64 = 0.7978845608028654;
/// Well-posedness threshold √(π/2) for the spread coefficient.
pub const SPREAD_COEF_THRESHOLD: f64 = 1.2533141373155003;

#[derive(Debug, Error, PartialEq)]
pub enum PricingError {
    #[error(
        "ill-posed regime: spread coefficient {spread_coef} <= sqrt(pi/2) ~ {SPREAD_COEF_THRESHOLD}; \
         the pricing PDE has a non-positive diffusion coefficient"
    )]
    IllPosedRegime { spread_coef: f64 },
    #[error("grid too coarse: need >= 200 space nodes and >= 4 time steps, got {space}x{time}")]
    GridTooCoarse { space: usize, time: usize },
    #[error("invalid market or grid parameter: {0}")]
    InvalidParams(String),
}

/// Market under the proportional-spread model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketSpec {
    /// Volatility per √year.
    pub sigma: f64,
    /// Continuously compounded rate per year.
    pub rate: f64,
    /// Dimensionless spread coefficient in `s_t = s·σ·p_t`.
    pub spread_coef: f64,
    /// Maturity in years.
    pub maturity: f64,
}

impl MarketSpec {
    fn validate(&self) -> Result<(), PricingError> {
        if self.sigma <= 0.0 || self.maturity <= 0.0 {
            return Err(PricingError::InvalidParams(
                "sigma and maturity must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `√(2/π)·s − 1`, the squared volatility multiplier.
    pub fn vol_factor_sq(&self) -> Result<f64, PricingError> {
        if self.spread_coef <= SPREAD_COEF_THRESHOLD {
            return Err(PricingError::IllPosedRegime {
                spread_coef: self.spread_coef,
            });
        }
        Ok(SQRT_2_OVER_PI * self.spread_coef - 1.0)
    }
}

/// `σ_eff = σ·√(√(2/π)·s − 1)`.
pub fn effective_volatility(market: &MarketSpec) -> Result<f64, PricingError> {
    market.validate()?;
    Ok(market.sigma * market.vol_factor_sq()?.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionPayoff {
    Call,
    Put,
}

/// Standard European price at the effective volatility.
pub fn price_closed_form(
    market: &MarketSpec,
    kind: OptionPayoff,
    strike: f64,
    spot: f64,
) -> Result<f64, PricingError> {
    if strike <= 0.0 || spot <= 0.0 {
        return Err(PricingError::InvalidParams(
            "strike and spot must be positive".into(),
        ));
    }
    let sigma = effective_volatility(market)?;
    Ok(black_scholes(
        kind,
        spot,
        strike,
        market.rate,
        sigma,
        market.maturity,
    ))
}

fn black_scholes(kind: OptionPayoff, spot: f64, strike: f64, r: f64, sigma: f64, t: f64) -> f64 {
    let st = sigma * t.sqrt();
    let d1 = ((spot / strike).ln() + (r + 0.5 * sigma * sigma) * t) / st;
    let d2 = d1 - st;
    let df = (-r * t).exp();
    match kind {
        OptionPayoff::Call => spot * normal_cdf(d1) - strike * df * normal_cdf(d2),
        OptionPayoff::Put => strike * df * normal_cdf(-d2) - spot * normal_cdf(-d1),
    }
}

/// Spatial grid for the PDE solve: log-spaced nodes around `center`,
/// spanning `half_width_sigmas` effective standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub space_nodes: usize,
    pub time_steps: usize,
    pub center: f64,
    pub half_width_sigmas: f64,
}

impl GridSpec {
    pub fn centered(center: f64) -> Self {
        GridSpec {
            space_nodes: 400,
            time_steps: 400,
            center,
            half_width_sigmas: 4.0,
        }
    }
}

/// Solved value surface on the (time, price) grid, forward in time:
/// level `0` is today, level `time_steps` the payoff at maturity.
#[derive(Debug, Clone)]
pub struct ValueSurface {
    pub market: MarketSpec,
    /// Time grid, `0..=time_steps` scaled to `[0, maturity]`.
    pub t: Vec<f64>,
    /// Price nodes (log-spaced).
    pub p: Vec<f64>,
    /// `values[m][i]` = v(t_m, p_i).
    pub values: Vec<Vec<f64>>,
    x0: f64,
    dx: f64,
    value_scale: f64,
}

impl ValueSurface {
    /// Bracketing node and linear-in-price weight; extrapolates linearly
    /// beyond the grid (consistent with the linear far-field boundaries).
    fn clamp_idx(&self, price: f64) -> (usize, f64) {
        let xi = (price.max(1e-300).ln() - self.x0) / self.dx;
        let i = (xi.floor().max(0.0) as usize).min(self.p.len() - 2);
        let w = (price - self.p[i]) / (self.p[i + 1] - self.p[i]);
        (i, w)
    }

    pub fn value_at(&self, level: usize, price: f64) -> f64 {
        let (i, w) = self.clamp_idx(price);
        let row = &self.values[level];
        row[i] * (1.0 - w) + row[i + 1] * w
    }

    /// ∂v/∂p by the quadratic-exact non-uniform stencil, one-sided at the
    /// boundaries, linearly interpolated between nodes.
    pub fn delta_at(&self, level: usize, price: f64) -> f64 {
        let (i, w) = self.clamp_idx(price);
        let w = w.clamp(0.0, 1.0);
        self.node_delta(level, i) * (1.0 - w) + self.node_delta(level, i + 1) * w
    }

    /// ∂²v/∂p² interpolated between nodes. Magnitudes below the solver's
    /// noise floor snap to zero so the order-type rule is not driven by
    /// roundoff in regions where the true gamma vanishes or underflows.
    pub fn gamma_at(&self, level: usize, price: f64) -> f64 {
        let (i, w) = self.clamp_idx(price);
        let w = w.clamp(0.0, 1.0);
        let g = self.node_gamma(level, i) * (1.0 - w) + self.node_gamma(level, i + 1) * w;
        if g.abs() * price * price < 1e-6 * self.value_scale {
            0.0
        } else {
            g
        }
    }

    fn node_delta(&self, level: usize, i: usize) -> f64 {
        let row = &self.values[level];
        let m = self.p.len() - 1;
        if i == 0 {
            (row[1] - row[0]) / (self.p[1] - self.p[0])
        } else if i == m {
            (row[m] - row[m - 1]) / (self.p[m] - self.p[m - 1])
        } else {
            let (hm, hp) = (self.p[i] - self.p[i - 1], self.p[i + 1] - self.p[i]);
            (-hp / (hm * (hm + hp))) * row[i - 1]
                + ((hp - hm) / (hm * hp)) * row[i]
                + (hm / (hp * (hm + hp))) * row[i + 1]
        }
    }

    fn node_gamma(&self, level: usize, i: usize) -> f64 {
        let m = self.p.len() - 1;
        let i = i.clamp(1, m - 1);
        let row = &self.values[level];
        let (hm, hp) = (self.p[i] - self.p[i - 1], self.p[i + 1] - self.p[i]);
        2.0 * (row[i - 1] / (hm * (hm + hp)) - row[i] / (hm * hp) + row[i + 1] / (hp * (hm + hp)))
    }
}

/// Solves the tridiagonal system `(lo, diag, up)·x = rhs` in place (Thomas).
fn thomas(lo: &[f64], diag: &[f64], up: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = diag.len();
    scratch[0] = up[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - lo[i] * scratch[i - 1];
        scratch[i] = up[i] / denom;
        rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

/// Backward theta-scheme solve of the pricing PDE with terminal condition
/// `v(T, p) = payoff(p)`: Crank–Nicolson with an implicit (Rannacher)
/// start-up, Dirichlet boundaries from the linear extension of the payoff
/// with discounted intercept (payoff-consistent near zero, linear in `p`
/// at the top).
pub fn solve_pde(
    market: &MarketSpec,
    payoff: impl Fn(f64) -> f64,
    grid: &GridSpec,
) -> Result<ValueSurface, PricingError> {
    market.validate()?;
    let sigma_eff = effective_volatility(market)?;
    if grid.space_nodes < 200 || grid.time_steps < 4 {
        return Err(PricingError::GridTooCoarse {
            space: grid.space_nodes,
            time: grid.time_steps,
        });
    }
    if grid.center <= 0.0 || grid.half_width_sigmas <= 0.0 {
        return Err(PricingError::InvalidParams(
            "grid center and width must be positive".into(),
        ));
    }
    let m = grid.space_nodes - 1;
    let half_width = grid.half_width_sigmas * sigma_eff * market.maturity.sqrt();
    let x0 = grid.center.ln() - half_width;
    let dx = 2.0 * half_width / m as f64;
    let p: Vec<f64> = (0..=m).map(|i| (x0 + i as f64 * dx).exp()).collect();

    // linear payoff extensions a·p + b·e^{-rτ} at both ends
    let slope_lo = (payoff(p[1]) - payoff(p[0])) / (p[1] - p[0]);
    let icept_lo = payoff(p[0]) - slope_lo * p[0];
    let slope_hi = (payoff(p[m]) - payoff(p[m - 1])) / (p[m] - p[m - 1]);
    let icept_hi = payoff(p[m]) - slope_hi * p[m];

    // generator on interior nodes: A v = (σ_eff² p²/2) v_pp + r p v_p − r v
    let n_int = m - 1;
    let mut gen_lo = vec![0.0; n_int];
    let mut gen_di = vec![0.0; n_int];
    let mut gen_up = vec![0.0; n_int];
    let r = market.rate;
    for k in 0..n_int {
        let i = k + 1;
        let (hm, hp) = (p[i] - p[i - 1], p[i + 1] - p[i]);
        let diff = 0.5 * sigma_eff * sigma_eff * p[i] * p[i];
        let drift = r * p[i];
        gen_lo[k] = diff * 2.0 / (hm * (hm + hp)) + drift * (-hp / (hm * (hm + hp)));
        gen_di[k] = diff * (-2.0 / (hm * hp)) + drift * ((hp - hm) / (hm * hp)) - r;
        gen_up[k] = diff * 2.0 / (hp * (hm + hp)) + drift * (hm / (hp * (hm + hp)));
    }

    let dt = market.maturity / grid.time_steps as f64;
    let mut values = vec![Vec::new(); grid.time_steps + 1];
    values[grid.time_steps] = p.iter().map(|&pi| payoff(pi)).collect();

    let mut v: Vec<f64> = values[grid.time_steps].clone();
    let mut rhs = vec![0.0; n_int];
    let mut scratch = vec![0.0; n_int];
    let mut lhs_lo = vec![0.0; n_int];
    let mut lhs_di = vec![0.0; n_int];
    let mut lhs_up = vec![0.0; n_int];

    // one theta-step of size `step_dt`, from time-to-maturity tau to tau+step_dt
    let mut step = |v: &mut Vec<f64>, tau_new: f64, step_dt: f64, theta: f64| {
        let b_lo = icept_lo * (-r * tau_new).exp();
        let b_hi = icept_hi * (-r * tau_new).exp();
        let bound_lo = slope_lo * p[0] + b_lo;
        let bound_hi = slope_hi * p[m] + b_hi;
        for k in 0..n_int {
            let explicit = (1.0 - theta) * step_dt;
            rhs[k] = v[k + 1]
                + explicit
                    * (gen_lo[k] * v[k] + gen_di[k] * v[k + 1] + gen_up[k] * v[k + 2]);
            lhs_lo[k] = -theta * step_dt * gen_lo[k];
            lhs_di[k] = 1.0 - theta * step_dt * gen_di[k];
            lhs_up[k] = -theta * step_dt * gen_up[k];
        }
        rhs[0] += theta * step_dt * gen_lo[0] * bound_lo;
        rhs[n_int - 1] += theta * step_dt * gen_up[n_int - 1] * bound_hi;
        thomas(&lhs_lo, &lhs_di, &lhs_up, &mut rhs, &mut scratch);
        v[0] = bound_lo;
        v[m] = bound_hi;
        v[1..m].copy_from_slice(&rhs);
    };

    for level in (0..grid.time_steps).rev() {
        let tau_end = (grid.time_steps - level) as f64 * dt;
        if level >= grid.time_steps - 2 {
            // Rannacher: two implicit half-steps instead of one CN step
            step(&mut v, tau_end - 0.5 * dt, 0.5 * dt, 1.0);
            step(&mut v, tau_end, 0.5 * dt, 1.0);
        } else {
            step(&mut v, tau_end, dt, 0.5);
        }
        values[level] = v.clone();
    }

    let t = (0..=grid.time_steps)
        .map(|i| i as f64 * dt)
        .collect::<Vec<f64>>();
    let value_scale = values[grid.time_steps]
        .iter()
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    Ok(ValueSurface {
        market: *market,
        t,
        p,
        values,
        x0,
        dx,
        value_scale,
    })
}

/// PDE price of a vanilla option at `spot`, on a grid centered between spot
/// and strike.
pub fn price_pde(
    market: &MarketSpec,
    kind: OptionPayoff,
    strike: f64,
    spot: f64,
    grid_nodes: Option<(usize, usize)>,
) -> Result<f64, PricingError> {
    if strike <= 0.0 || spot <= 0.0 {
        return Err(PricingError::InvalidParams(
            "strike and spot must be positive".into(),
        ));
    }
    let mut grid = GridSpec::centered((strike * spot).sqrt());
    if let Some((space, time)) = grid_nodes {
        grid.space_nodes = space;
        grid.time_steps = time;
    }
    let payoff = move |p: f64| match kind {
        OptionPayoff::Call => (p - strike).max(0.0),
        OptionPayoff::Put => (strike - p).max(0.0),
    };
    let surface = solve_pde(market, payoff, &grid)?;
    Ok(surface.value_at(0, spot))
}

/// One delta-hedge rebalancing step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeStep {
    pub step: usize,
    pub time: f64,
    pub price: f64,
    /// Holdings: `L_t = ∂v/∂p`.
    pub holdings: f64,
    /// Inventory volatility `l_t = σ·p·∂²v/∂p²`.
    pub inventory_vol: f64,
    /// Limit orders iff `l_t < 0`.
    pub kind: OrderKind,
}

fn order_kind_of(inventory_vol: f64) -> OrderKind {
    if inventory_vol < 0.0 {
        OrderKind::Limit
    } else {
        OrderKind::Market
    }
}

/// Reads the delta hedge off a solved surface along a price path sampled at
/// the surface's time levels.
pub fn hedge_schedule(surface: &ValueSurface, path: &[f64]) -> Vec<HedgeStep> {
    assert_eq!(
        path.len(),
        surface.t.len(),
        "path must be sampled at the surface time levels"
    );
    path.iter()
        .enumerate()
        .map(|(k, &price)| {
            let gamma = surface.gamma_at(k, price);
            let l = surface.market.sigma * price * gamma;
            HedgeStep {
                step: k,
                time: surface.t[k],
                price,
                holdings: surface.delta_at(k, price),
                inventory_vol: l,
                kind: order_kind_of(l),
            }
        })
        .collect()
}

/// Outcome of replicating one path with the discrete clearing equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationOutcome {
    pub terminal_wealth: f64,
    pub payoff: f64,
    /// `X_N − f(p_N)`.
    pub terminal_error: f64,
}

/// Replicates the payoff along one GBM path (drift = rate): start from
/// `K_0 = v(0,p_0) − ∂v/∂p(0,p_0)·p_0`, rebalance to the surface delta each
/// step, clear trades at the mid ± half the vanishing spread
/// `s_n = s·σ·p_n·√Δt` with the order type picked by the gamma sign, and
/// let the cash account accrue interest.
pub fn replicate_path(
    surface: &ValueSurface,
    payoff: impl Fn(f64) -> f64,
    spot: f64,
    seed: u64,
) -> ReplicationOutcome {
    replicate_path_detailed(surface, payoff, spot, seed).0
}

/// As [`replicate_path`], also returning the realized hedge schedule
/// (order kinds per rebalancing step).
pub fn replicate_path_detailed(
    surface: &ValueSurface,
    payoff: impl Fn(f64) -> f64,
    spot: f64,
    seed: u64,
) -> (ReplicationOutcome, Vec<HedgeStep>) {
    let market = &surface.market;
    let n = surface.t.len() - 1;
    let dt = market.maturity / n as f64;
    let sqrt_dt = dt.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut price = spot;
    let mut holdings = surface.delta_at(0, spot);
    let mut wealth = surface.value_at(0, spot); // = L_0 p_0 + K_0
    let mut schedule = Vec::with_capacity(n);
    for k in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let next_price = price
            * ((market.rate - 0.5 * market.sigma * market.sigma) * dt
                + market.sigma * sqrt_dt * z)
                .exp();
        let next_holdings = surface.delta_at(k + 1, next_price);
        let dl = next_holdings - holdings;
        let dp = next_price - price;
        let spread_n = market.spread_coef * market.sigma * price * sqrt_dt;
        let inventory_vol = market.sigma * price * surface.gamma_at(k, price);
        let kind = order_kind_of(inventory_vol);
        schedule.push(HedgeStep {
            step: k,
            time: surface.t[k],
            price,
            holdings,
            inventory_vol,
            kind,
        });
        let cash = wealth - holdings * price;
        wealth += holdings * dp
            + kind.cost_sign() as f64 * 0.5 * spread_n * dl.abs()
            + dp * dl
            + market.rate * dt * cash;
        price = next_price;
        holdings = next_holdings;
    }
    let payoff_value = payoff(price);
    (
        ReplicationOutcome {
            terminal_wealth: wealth,
            payoff: payoff_value,
            terminal_error: wealth - payoff_value,
        },
        schedule,
    )
}

/// Root-mean-square terminal error over independent paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationStudyRow {
    pub n_steps: usize,
    pub paths: usize,
    pub rms_error: f64,
}

/// Solves the surface once per resolution and replicates `paths`
/// independent GBM paths against it.
pub fn replication_rms(
    market: &MarketSpec,
    payoff: impl Fn(f64) -> f64 + Sync,
    spot: f64,
    n_steps: usize,
    paths: usize,
    seed: u64,
    space_nodes: usize,
) -> Result<ReplicationStudyRow, PricingError> {
    let grid = GridSpec {
        space_nodes,
        time_steps: n_steps,
        center: spot,
        half_width_sigmas: 6.0,
    };
    let surface = solve_pde(market, &payoff, &grid)?;
    let sum_sq: f64 = (0..paths)
        .into_par_iter()
        .map(|i| {
            let e = replicate_path(&surface, &payoff, spot, seed.wrapping_add(i as u64))
                .terminal_error;
            e * e
        })
        .sum();
    Ok(ReplicationStudyRow {
        n_steps,
        paths,
        rms_error: (sum_sq / paths as f64).sqrt(),
    })
}
