//! Symmetric mixed-strategy equilibrium of the unfloored market.
//!
//! Every seller draws a price from
//!
//! ```text
//! F(p) = 1 - ((1 - mu) / (n mu) * (P_M / p - 1))^(1 / (n - 1)),   p in [P_L, P_M]
//! ```
//!
//! and searchers accept any price up to the reserve `P_M = E(F) + c`. Because
//! `F` depends on price only through `p / P_M`, the ratio `g = E(F) / P_M` is a
//! function of `(n, mu)` alone and the reserve price follows as `c / (1 - g)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::{integrate, DEFAULT_ABS_TOL};

/// Relative tolerance on `|P_M - (E(F) + c)|` when `E(F)` is recomputed
/// independently from the quantile function.
pub const FIXED_POINT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StahlEquilibrium {
    pub params: ModelParams,
    /// Searcher reserve price, the top of the pricing support.
    pub p_m: f64,
    /// Bottom of the pricing support.
    pub p_l: f64,
    /// `E(F) / P_M`.
    pub g_ratio: f64,
    /// Expected price offered, `P_M - c`.
    pub epo: f64,
}

/// `ln((1 + mu) / (1 - mu))`.
pub fn kappa(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain("mu", format!("kappa needs 0 < mu < 1, got {mu}")));
    }
    Ok((2.0 * mu / (1.0 - mu)).ln_1p())
}

/// `E(F) / P_M`, closed form for two and three sellers, quadrature beyond.
pub fn expected_ratio(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let mu = params.mu;
    match params.n {
        2 => Ok(kappa(mu)? * (1.0 - mu) / (2.0 * mu)),
        3 => {
            let t = 3.0 * mu / (1.0 - mu);
            Ok(t.sqrt().atan() / t.sqrt())
        }
        _ => expected_ratio_by_quadrature(params),
    }
}

/// `E(F) / P_M = r_L + integral over [r_L, 1] of (1 - F(r)) dr`, in the
/// normalised price `r = p / P_M`, evaluated numerically for any `n`.
pub fn expected_ratio_by_quadrature(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    Ok(params.lower_ratio() + upper_tail_integral(params, 1)?)
}

/// Integral over `[r_L, 1]` of `(1 - F(r))^power`.
///
/// `1 - F` has an `(1 - r)^(1/(n-1))` cusp at `r = 1`, so the integral is taken
/// in `s` with `1 - r = (1 - r_L) s^(n-1)`. Using `k (1 - r_L) = r_L` the
/// integrand becomes `(n-1)(1-r_L) s^(n-2+power) (r_L / r)^(power/(n-1))`,
/// which is smooth on `[0, 1]`.
fn upper_tail_integral(params: &ModelParams, power: u32) -> Result<f64> {
    let m = params.n as f64 - 1.0;
    let r_l = params.lower_ratio();
    let width = 1.0 - r_l;
    let exponent = f64::from(power) / m;
    let integrand = |s: f64| {
        let sm = s.powf(m);
        let r = 1.0 - width * sm;
        m * width * s.powf(m - 1.0 + f64::from(power)) * (r_l / r).powf(exponent)
    };
    Ok(integrate(integrand, 0.0, 1.0, DEFAULT_ABS_TOL)?.value)
}

/// Solves the reserve-price fixed point `P_M = E(F) + c`.
pub fn solve_reserve_price(params: &ModelParams) -> Result<StahlEquilibrium> {
    let g_ratio = expected_ratio(params)?;
    if !(g_ratio > 0.0 && g_ratio < 1.0) {
        return Err(Error::domain(
            "mu",
            format!("expected-price ratio {g_ratio} is not in (0, 1)"),
        ));
    }
    let p_m = params.c / (1.0 - g_ratio);
    if let Some(cap) = params.m_valuation {
        if p_m > cap {
            return Err(Error::ValuationCapBinds { reserve: p_m, cap });
        }
    }
    let eq = StahlEquilibrium {
        params: *params,
        p_m,
        p_l: p_m * params.lower_ratio(),
        g_ratio,
        epo: p_m - params.c,
    };

    let mean = mean_price_by_quantile(&eq)?;
    let residual = (eq.p_m - (mean + params.c)).abs();
    let tolerance = FIXED_POINT_REL_TOL * eq.p_m;
    if residual > tolerance {
        return Err(Error::FixedPoint {
            residual,
            tolerance,
        });
    }
    Ok(eq)
}

/// `E(F)` as the integral of the quantile function over `[0, 1]`.
fn mean_price_by_quantile(eq: &StahlEquilibrium) -> Result<f64> {
    let tol = 1e-2 * FIXED_POINT_REL_TOL * eq.p_m;
    Ok(integrate(|u| quantile_unchecked(eq, u), 0.0, 1.0, tol)?.value)
}

pub fn cdf(eq: &StahlEquilibrium, p: f64) -> Result<f64> {
    let slack = 1e-12 * eq.p_m;
    if !(p >= eq.p_l - slack && p <= eq.p_m + slack) {
        return Err(Error::Range {
            what: "price",
            value: p,
            lo: eq.p_l,
            hi: eq.p_m,
        });
    }
    let params = &eq.params;
    let base = (params.cdf_scale() * (eq.p_m / p - 1.0)).max(0.0);
    Ok((1.0 - base.powf(1.0 / (params.n as f64 - 1.0))).clamp(0.0, 1.0))
}

pub fn quantile(eq: &StahlEquilibrium, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Range {
            what: "probability",
            value: u,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(quantile_unchecked(eq, u))
}

#[inline]
fn quantile_unchecked(eq: &StahlEquilibrium, u: f64) -> f64 {
    let params = &eq.params;
    let a = 1.0 / params.cdf_scale();
    eq.p_m / (1.0 + a * (1.0 - u).powi(params.n as i32 - 1))
}

/// Expected minimum of `n` independent draws from `F`, the price shoppers
/// pay on average.
pub fn shopper_expected_min(eq: &StahlEquilibrium) -> Result<f64> {
    let params = &eq.params;
    if params.n == 2 {
        // With k = (1-mu)/(2mu): E(min) = 2 k P_M (1 - k kappa).
        let k = params.cdf_scale();
        return Ok(2.0 * k * eq.p_m * (1.0 - k * kappa(params.mu)?));
    }
    let tail = upper_tail_integral(params, params.n as u32)?;
    Ok(eq.p_m * (params.lower_ratio() + tail))
}
