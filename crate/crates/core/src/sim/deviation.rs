use rand::Rng;
use serde::{Deserialize, Serialize};

use super::market::{check_market, clear, Clearing, SimConfig};
use super::profit::{analytic_profit, expected_profit};
use super::stats::{Estimate, RunningStats};
use super::strategy::SellerStrategy;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Largest analytic deviation gain still counted as no gain.
pub const ANALYTIC_MARGIN_TOL: f64 = 1e-9;
/// Simulated gains are accepted up to this many standard errors.
pub const SIM_MARGIN_SE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridProfit {
    pub price: f64,
    pub analytic: f64,
    pub simulated: Estimate,
    /// Simulated deviation profit minus equilibrium profit, paired by trial.
    pub gain: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub grid: Vec<f64>,
    pub profit_at: Vec<GridProfit>,
    pub equilibrium_profit: f64,
    pub equilibrium_profit_sim: Estimate,
    /// `max_grid analytic - equilibrium_profit`.
    pub margin: f64,
    /// Largest simulated paired gain over the grid.
    pub margin_sim: Estimate,
    pub argmax_price: f64,
    pub trials: u64,
}

impl DeviationReport {
    pub fn analytic_pass(&self) -> bool {
        self.margin <= ANALYTIC_MARGIN_TOL
    }

    pub fn simulated_pass(&self) -> bool {
        self.margin_sim.mean <= SIM_MARGIN_SE * self.margin_sim.se + ANALYTIC_MARGIN_TOL
    }

    pub fn passes(&self) -> bool {
        self.analytic_pass() && self.simulated_pass()
    }
}

/// Scans unilateral deviations by seller 0 to each grid price against
/// `n - 1` opponents playing `opponents`.
///
/// Every trial draws one uniform per seller. Opponents use theirs for both
/// the equilibrium and all deviation markets, and seller 0 uses hers only on
/// the equilibrium path, so gains are measured with common random numbers.
pub fn best_response_grid(
    params: &ModelParams,
    opponents: &SellerStrategy,
    reserve: f64,
    grid: &[f64],
    config: &SimConfig,
) -> Result<DeviationReport> {
    check_market(params, reserve, config)?;
    if grid.is_empty() {
        return Err(Error::domain("grid", "deviation grid is empty"));
    }
    if let Some(&bad) = grid.iter().find(|&&p| !(p.is_finite() && p > 0.0)) {
        return Err(Error::domain("grid", format!("grid prices must be > 0, got {bad}")));
    }
    let analytic: Vec<f64> = grid
        .iter()
        .map(|&p| analytic_profit(params, p, opponents, reserve))
        .collect::<Result<_>>()?;
    let equilibrium_profit = expected_profit(params, opponents, reserve)?;

    let sampler = opponents.sampler();
    let n = params.n;
    let (mu, c) = (params.mu, params.c);
    let k = grid.len();

    let parts = config.run(|rng, trials| {
        let mut eq_stats = RunningStats::default();
        let mut dev = vec![RunningStats::default(); k];
        let mut gain = vec![RunningStats::default(); k];
        let mut prices = vec![0.0; n];
        let mut out = Clearing::new(n);
        for _ in 0..trials {
            for p in prices.iter_mut() {
                *p = sampler.sample(rng.random::<f64>());
            }
            clear(&prices, mu, c, reserve, &mut out);
            let base = prices[0] * out.quantity[0];
            eq_stats.push(base);
            for (j, &g) in grid.iter().enumerate() {
                prices[0] = g;
                clear(&prices, mu, c, reserve, &mut out);
                let profit = g * out.quantity[0];
                dev[j].push(profit);
                gain[j].push(profit - base);
            }
        }
        (eq_stats, dev, gain)
    });

    let mut eq_stats = RunningStats::default();
    let mut dev = vec![RunningStats::default(); k];
    let mut gain = vec![RunningStats::default(); k];
    for (e, d, g) in &parts {
        eq_stats.merge(e);
        for (a, b) in dev.iter_mut().zip(d) {
            a.merge(b);
        }
        for (a, b) in gain.iter_mut().zip(g) {
            a.merge(b);
        }
    }

    let profit_at: Vec<GridProfit> = grid
        .iter()
        .zip(&analytic)
        .zip(dev.iter().zip(&gain))
        .map(|((&price, &analytic), (d, g))| GridProfit {
            price,
            analytic,
            simulated: d.estimate(),
            gain: g.estimate(),
        })
        .collect();
    let margin = analytic.iter().copied().fold(f64::NEG_INFINITY, f64::max) - equilibrium_profit;
    let best = profit_at
        .iter()
        .max_by(|a, b| a.gain.mean.total_cmp(&b.gain.mean))
        .expect("grid is nonempty");

    Ok(DeviationReport {
        grid: grid.to_vec(),
        margin,
        margin_sim: best.gain,
        argmax_price: best.price,
        profit_at,
        equilibrium_profit,
        equilibrium_profit_sim: eq_stats.estimate(),
        trials: config.trials,
    })
}
