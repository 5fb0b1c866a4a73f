use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("fixed-point residual {residual} exceeds tolerance {tolerance}")]
    FixedPoint { residual: f64, tolerance: f64 },

    #[error("valuation cap binds: reserve price {reserve} exceeds M = {cap}")]
    ValuationCapBinds { reserve: f64, cap: f64 },

    #[error(
        "no mass-point equilibrium found for floor {floor}: residual {lo_residual} at rho->0, \
         {hi_residual} at rho->1"
    )]
    NoMassPoint {
        floor: f64,
        lo_residual: f64,
        hi_residual: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid strategy: {0}")]
    Strategy(String),

    #[error("invalid simulation config: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Range { .. } => "range",
            Error::Quadrature { .. } => "quadrature",
            Error::NotBracketed { .. } => "not_bracketed",
            Error::FixedPoint { .. } => "fixed_point",
            Error::ValuationCapBinds { .. } => "valuation_cap_binds",
            Error::NoMassPoint { .. } => "no_mass_point",
            Error::Unsupported(_) => "unsupported",
            Error::Strategy(_) => "strategy",
            Error::Config(_) => "config",
        }
    }

    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }
}
