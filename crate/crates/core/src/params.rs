use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest shopper share accepted. Shares closer to 0 or 1 approach the
/// Diamond and Bertrand corners where the expected-price ratio degenerates.
pub const MU_MIN: f64 = 1e-6;
pub const MU_MAX: f64 = 1.0 - 1e-6;

/// Market primitives: sellers, search cost, shopper share and an optional
/// valuation cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub c: f64,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_valuation: Option<f64>,
}

impl ModelParams {
    pub fn new(n: usize, c: f64, mu: f64) -> Result<Self> {
        let params = ModelParams {
            n,
            c,
            mu,
            m_valuation: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_valuation_cap(mut self, cap: f64) -> Result<Self> {
        self.m_valuation = Some(cap);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain("n", format!("need at least 2 sellers, got {}", self.n)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::domain("c", format!("search cost must be > 0, got {}", self.c)));
        }
        if !(MU_MIN..=MU_MAX).contains(&self.mu) {
            return Err(Error::domain(
                "mu",
                format!("shopper share must lie in [{MU_MIN}, {MU_MAX}], got {}", self.mu),
            ));
        }
        if let Some(cap) = self.m_valuation {
            if !(cap.is_finite() && cap > self.c) {
                return Err(Error::domain(
                    "m_valuation",
                    format!("valuation cap must exceed c = {}, got {cap}", self.c),
                ));
            }
        }
        Ok(())
    }

    /// `(1 - mu) / (n mu)`, the scale of the pricing CDF.
    pub(crate) fn cdf_scale(&self) -> f64 {
        (1.0 - self.mu) / (self.n as f64 * self.mu)
    }

    /// Lower support bound as a fraction of the reserve price.
    pub(crate) fn lower_ratio(&self) -> f64 {
        (1.0 - self.mu) / (1.0 + (self.n as f64 - 1.0) * self.mu)
    }
}
