//! Equilibrium engine for the Stahl sequential-search market with an
//! exogenous minimum price.
//!
//! The crate is split into four layers:
//!
//! * [`equilibrium`] solves the unfloored symmetric equilibrium: the pricing
//!   CDF, its support, the searchers' reserve price and the expected price
//!   offered (EPO).
//! * [`floor`] adds a price floor: the critical floor `P*`, regime
//!   classification, the pure Bertrand outcome and the two-seller mass-point
//!   equilibria.
//! * [`sim`] is an independent Monte-Carlo market used to check every
//!   analytic result, including best-response deviation scans.
//! * [`quadrature`] and [`roots`] are the numerical kernels the solvers share.

pub mod equilibrium;
pub mod error;
pub mod floor;
pub mod params;
pub mod quadrature;
pub mod roots;
pub mod sim;

pub use equilibrium::{
    cdf, expected_ratio, expected_ratio_by_quadrature, kappa, quantile, shopper_expected_min,
    solve_reserve_price, StahlEquilibrium,
};
pub use error::{Error, Result};
pub use floor::{
    beta_ratio, classify_floor, epo_curve, mass_consistency_residual, p_star,
    pure_no_deviation_margin, solve_floored, EpoPoint, FloorRegime, FlooredEquilibrium,
};
pub use params::ModelParams;
