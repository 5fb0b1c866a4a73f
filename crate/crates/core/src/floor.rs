//! Equilibria under an exogenous minimum price `P_C`.
//!
//! Three regimes partition the floor axis:
//!
//! * `P_C <= P_L`: the floor never binds and the unfloored equilibrium stands.
//! * `P_L < P_C < P*`: sellers put mass `rho` on the floor and mix over
//!   `(P_N, P_M)` above it. Solved here for two sellers only.
//! * `P_C >= P*`: every seller posts the floor and searchers accept up to
//!   `P_C + c`.
//!
//! with `P* = c (1 - mu) / mu`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::StahlEquilibrium;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::roots::bisect;

/// Bracket for the floor mass in the mass-point solver.
pub const RHO_BRACKET: (f64, f64) = (1e-9, 1.0 - 1e-9);
pub const RHO_TOL: f64 = 1e-10;
/// Relative slack for treating a floor as sitting on a regime boundary.
pub const BOUNDARY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FloorRegime {
    Inactive,
    MassPoint,
    PureBertrand,
}

impl FloorRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            FloorRegime::Inactive => "Inactive",
            FloorRegime::MassPoint => "MassPoint",
            FloorRegime::PureBertrand => "PureBertrand",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlooredEquilibrium {
    pub params: ModelParams,
    pub regime: FloorRegime,
    pub floor: f64,
    /// Probability mass on the floor.
    pub rho: f64,
    /// Bottom of the continuous part, present only for `MassPoint`.
    pub p_n: Option<f64>,
    /// Searcher reserve price. Equals `floor + c` in the pure regime.
    pub p_m: f64,
    pub epo: f64,
    pub reserve: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpoPoint {
    pub floor: f64,
    pub epo: f64,
    pub rho: f64,
    pub p_m: f64,
    pub regime: FloorRegime,
}

/// Critical floor `c (1 - mu) / mu`; independent of the number of sellers.
pub fn p_star(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    Ok(params.c * (1.0 - params.mu) / params.mu)
}

/// `(P_M - c) / P*`. Above one exactly when `P_M > c / mu`, i.e. when a floor
/// at `P*` lowers the expected price offered.
pub fn beta_ratio(eq: &StahlEquilibrium) -> f64 {
    let p = &eq.params;
    p.mu * (eq.p_m - p.c) / (p.c * (1.0 - p.mu))
}

fn check_floor(p_c: f64) -> Result<()> {
    if !(p_c.is_finite() && p_c > 0.0) {
        return Err(Error::domain("pc", format!("floor must be > 0, got {p_c}")));
    }
    Ok(())
}

pub fn classify_floor(eq: &StahlEquilibrium, p_c: f64) -> Result<FloorRegime> {
    check_floor(p_c)?;
    let critical = p_star(&eq.params)?;
    Ok(if p_c <= eq.p_l * (1.0 + BOUNDARY_REL_TOL) {
        FloorRegime::Inactive
    } else if p_c >= critical * (1.0 - BOUNDARY_REL_TOL) {
        FloorRegime::PureBertrand
    } else {
        FloorRegime::MassPoint
    })
}

/// Profit of posting the floor when everyone does, minus the best upward
/// deviation (to `P_C + c`, served only by searchers who start there).
/// Non-negative exactly when `P_C >= P*`.
pub fn pure_no_deviation_margin(params: &ModelParams, p_c: f64) -> Result<f64> {
    params.validate()?;
    check_floor(p_c)?;
    let n = params.n as f64;
    Ok(p_c / n - (p_c + params.c) * (1.0 - params.mu) / n)
}

/// Reserve price implied by floor indifference in the two-seller mass-point
/// profile: `P_C (1 + mu - mu rho) / (1 - mu)`.
fn mass_point_reserve(mu: f64, p_c: f64, rho: f64) -> f64 {
    p_c * (1.0 + mu - mu * rho) / (1.0 - mu)
}

/// `ln(P_M / P_N)` with `P_M / P_N = (1 + mu - 2 mu rho) / (1 - mu)`.
fn log_support_ratio(mu: f64, rho: f64) -> f64 {
    (2.0 * mu * (1.0 - rho) / (1.0 - mu)).ln_1p()
}

/// Two-seller consistency of a floor mass `rho` with searcher rationality:
/// `(E(F) - (P_M - c)) / c` where
/// `E(F) = rho P_C + (1-mu)/(2mu) P_M ln(P_M / P_N)`.
pub fn mass_consistency_residual(params: &ModelParams, p_c: f64, rho: f64) -> Result<f64> {
    params.validate()?;
    check_floor(p_c)?;
    if params.n != 2 {
        return Err(Error::Unsupported(format!(
            "mass-point residual has a closed form only for 2 sellers, got n = {}",
            params.n
        )));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Range {
            what: "rho",
            value: rho,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(residual_unchecked(params, p_c, rho))
}

fn residual_unchecked(params: &ModelParams, p_c: f64, rho: f64) -> f64 {
    let mu = params.mu;
    let reserve = mass_point_reserve(mu, p_c, rho);
    let mean = rho * p_c + (1.0 - mu) / (2.0 * mu) * reserve * log_support_ratio(mu, rho);
    (mean - (reserve - params.c)) / params.c
}

pub fn solve_floored(eq: &StahlEquilibrium, p_c: f64) -> Result<FlooredEquilibrium> {
    let params = eq.params;
    match classify_floor(eq, p_c)? {
        FloorRegime::Inactive => Ok(FlooredEquilibrium {
            params,
            regime: FloorRegime::Inactive,
            floor: p_c,
            rho: 0.0,
            p_n: None,
            p_m: eq.p_m,
            epo: eq.epo,
            reserve: eq.p_m,
        }),
        FloorRegime::PureBertrand => Ok(FlooredEquilibrium {
            params,
            regime: FloorRegime::PureBertrand,
            floor: p_c,
            rho: 1.0,
            p_n: None,
            p_m: p_c + params.c,
            epo: p_c,
            reserve: p_c + params.c,
        }),
        FloorRegime::MassPoint => solve_mass_point(&params, p_c),
    }
}

fn solve_mass_point(params: &ModelParams, p_c: f64) -> Result<FlooredEquilibrium> {
    if params.n != 2 {
        return Err(Error::Unsupported(format!(
            "mass-point equilibria are only solved for 2 sellers, got n = {}",
            params.n
        )));
    }
    let (lo, hi) = RHO_BRACKET;
    let f = |rho: f64| residual_unchecked(params, p_c, rho);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoMassPoint {
            floor: p_c,
            lo_residual: f_lo,
            hi_residual: f_hi,
        });
    }
    let rho = bisect(f, lo, hi, RHO_TOL)?;
    let mu = params.mu;
    let p_m = mass_point_reserve(mu, p_c, rho);
    let p_n = p_m * (1.0 - mu) / (1.0 + mu - 2.0 * mu * rho);
    Ok(FlooredEquilibrium {
        params: *params,
        regime: FloorRegime::MassPoint,
        floor: p_c,
        rho,
        p_n: Some(p_n),
        p_m,
        epo: p_m - params.c,
        reserve: p_m,
    })
}

/// Solves the floored equilibrium at each floor of a strictly increasing list.
pub fn epo_curve(eq: &StahlEquilibrium, floors: &[f64]) -> Result<Vec<EpoPoint>> {
    if floors.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("floors", "floors must be strictly increasing"));
    }
    floors
        .iter()
        .map(|&p_c| {
            let f = solve_floored(eq, p_c)?;
            Ok(EpoPoint {
                floor: p_c,
                epo: f.epo,
                rho: f.rho,
                p_m: f.p_m,
                regime: f.regime,
            })
        })
        .collect()
}
