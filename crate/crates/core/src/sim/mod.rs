//! Monte-Carlo market used as an independent oracle for the analytic
//! equilibria.
//!
//! Each trial realizes one price per seller and clears the market in
//! expectation over consumers: shoppers (mass `mu`) buy at the cheapest store,
//! splitting ties evenly, and searchers (mass `1 - mu`) start uniformly over
//! stores, accept the first price at or below the reserve, and otherwise keep
//! sampling unvisited stores at cost `c` with free recall.

mod deviation;
mod market;
mod profit;
mod stats;
mod strategy;

pub use deviation::{best_response_grid, DeviationReport, GridProfit, ANALYTIC_MARGIN_TOL};
pub use market::{simulate_market, SimConfig, SimReport};
pub use profit::{analytic_profit, expected_profit};
pub use stats::{Estimate, RunningStats};
pub use strategy::{Atom, Segment, SellerStrategy};
