use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{Estimate, RunningStats};
use super::strategy::{Sampler, SellerStrategy};
use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimConfig {
            trials,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(())
    }

    /// Trial counts per worker; the first `trials % workers` get one extra.
    pub(crate) fn chunks(&self) -> Vec<u64> {
        let w = self.workers as u64;
        (0..w)
            .map(|i| self.trials / w + u64::from(i < self.trials % w))
            .collect()
    }

    /// Runs `body` once per worker on its own ChaCha stream and returns the
    /// per-worker results in worker order.
    pub(crate) fn run<T, F>(&self, body: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
    {
        let chunks = self.chunks();
        let stream = |i: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(i as u64);
            rng
        };
        if chunks.len() == 1 {
            return vec![body(&mut stream(0), chunks[0])];
        }
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .enumerate()
                .map(|(i, &trials)| {
                    let body = &body;
                    scope.spawn(move || body(&mut stream(i), trials))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("simulation worker panicked"))
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    /// Mean posted price across sellers.
    pub epo_hat: Estimate,
    pub profit_hat: Vec<Estimate>,
    /// Mean price plus search fees paid per searcher.
    pub searcher_cost_hat: Estimate,
    /// Mean search fees paid per searcher.
    pub search_fee_hat: Estimate,
    pub shopper_price_hat: Estimate,
    pub market_share: Vec<Estimate>,
}

/// Realized outcome of one trial, in expectation over consumers.
#[derive(Debug, Clone)]
pub(crate) struct Clearing {
    pub quantity: Vec<f64>,
    /// Price plus fees, per unit of searcher mass.
    pub searcher_cost: f64,
    pub search_fees: f64,
    pub shopper_price: f64,
}

impl Clearing {
    pub(crate) fn new(n: usize) -> Self {
        Clearing {
            quantity: vec![0.0; n],
            searcher_cost: 0.0,
            search_fees: 0.0,
            shopper_price: 0.0,
        }
    }
}

/// Clears the market for realized `prices`.
///
/// A searcher who starts at a store priced above `reserve` visits the others
/// in uniformly random order. With `k` acceptable stores among them, the
/// first acceptable one is uniform over those `k` and is reached after
/// `n / (k + 1)` further visits on average. With none acceptable she visits
/// all stores and recalls the cheapest.
pub(crate) fn clear(prices: &[f64], mu: f64, c: f64, reserve: f64, out: &mut Clearing) {
    let n = prices.len();
    let min = prices.iter().copied().fold(f64::INFINITY, f64::min);
    let ties = prices.iter().filter(|&&p| p == min).count() as f64;
    let acceptable = prices.iter().filter(|&&p| p <= reserve).count();
    let acceptable_sum: f64 = prices.iter().filter(|&&p| p <= reserve).sum();

    let start = (1.0 - mu) / n as f64;
    let rejected = (n - acceptable) as f64 * start;
    let mut spend = 0.0;
    let mut fees = 0.0;
    for (q, &p) in out.quantity.iter_mut().zip(prices) {
        *q = if p == min { mu / ties } else { 0.0 };
        if p <= reserve {
            *q += start;
            spend += start * p;
        }
    }
    if rejected > 0.0 {
        if acceptable > 0 {
            let k = acceptable as f64;
            let visits = n as f64 / (k + 1.0);
            for (q, &p) in out.quantity.iter_mut().zip(prices) {
                if p <= reserve {
                    *q += rejected / k;
                }
            }
            spend += rejected * acceptable_sum / k;
            fees += rejected * c * visits;
        } else {
            for (q, &p) in out.quantity.iter_mut().zip(prices) {
                if p == min {
                    *q += rejected / ties;
                }
            }
            spend += rejected * min;
            fees += rejected * c * (n - 1) as f64;
        }
    }
    let searchers = 1.0 - mu;
    out.searcher_cost = (spend + fees) / searchers;
    out.search_fees = fees / searchers;
    out.shopper_price = min;
}

#[derive(Debug, Clone)]
struct Accumulators {
    epo: RunningStats,
    profit: Vec<RunningStats>,
    share: Vec<RunningStats>,
    searcher_cost: RunningStats,
    search_fees: RunningStats,
    shopper_price: RunningStats,
}

impl Accumulators {
    fn new(n: usize) -> Self {
        Accumulators {
            epo: RunningStats::default(),
            profit: vec![RunningStats::default(); n],
            share: vec![RunningStats::default(); n],
            searcher_cost: RunningStats::default(),
            search_fees: RunningStats::default(),
            shopper_price: RunningStats::default(),
        }
    }

    fn merge(&mut self, other: &Accumulators) {
        self.epo.merge(&other.epo);
        for (a, b) in self.profit.iter_mut().zip(&other.profit) {
            a.merge(b);
        }
        for (a, b) in self.share.iter_mut().zip(&other.share) {
            a.merge(b);
        }
        self.searcher_cost.merge(&other.searcher_cost);
        self.search_fees.merge(&other.search_fees);
        self.shopper_price.merge(&other.shopper_price);
    }
}

pub(crate) fn check_market(params: &ModelParams, reserve: f64, config: &SimConfig) -> Result<()> {
    params.validate()?;
    config.validate()?;
    if !(reserve.is_finite() && reserve > 0.0) {
        return Err(Error::domain("reserve", format!("reserve must be > 0, got {reserve}")));
    }
    Ok(())
}

/// Simulates `config.trials` independent markets, seller `i` pricing from
/// `strategies[i]`, and reports means with standard errors.
pub fn simulate_market(
    params: &ModelParams,
    strategies: &[SellerStrategy],
    reserve: f64,
    config: &SimConfig,
) -> Result<SimReport> {
    check_market(params, reserve, config)?;
    if strategies.len() != params.n {
        return Err(Error::Strategy(format!(
            "need one strategy per seller: {} given for n = {}",
            strategies.len(),
            params.n
        )));
    }
    for s in strategies {
        s.validate()?;
    }
    let samplers: Vec<Sampler> = strategies.iter().map(SellerStrategy::sampler).collect();
    let n = params.n;
    let (mu, c) = (params.mu, params.c);

    let parts = config.run(|rng, trials| {
        let mut acc = Accumulators::new(n);
        let mut prices = vec![0.0; n];
        let mut out = Clearing::new(n);
        for _ in 0..trials {
            for (p, s) in prices.iter_mut().zip(&samplers) {
                *p = s.sample(rng.random::<f64>());
            }
            clear(&prices, mu, c, reserve, &mut out);
            acc.epo.push(prices.iter().sum::<f64>() / n as f64);
            for i in 0..n {
                acc.profit[i].push(prices[i] * out.quantity[i]);
                acc.share[i].push(out.quantity[i]);
            }
            acc.searcher_cost.push(out.searcher_cost);
            acc.search_fees.push(out.search_fees);
            acc.shopper_price.push(out.shopper_price);
        }
        acc
    });

    let mut total = Accumulators::new(n);
    for part in &parts {
        total.merge(part);
    }
    Ok(SimReport {
        trials: config.trials,
        epo_hat: total.epo.estimate(),
        profit_hat: total.profit.iter().map(RunningStats::estimate).collect(),
        searcher_cost_hat: total.searcher_cost.estimate(),
        search_fee_hat: total.search_fees.estimate(),
        shopper_price_hat: total.shopper_price.estimate(),
        market_share: total.share.iter().map(RunningStats::estimate).collect(),
    })
}
