use serde::{Deserialize, Serialize};

use crate::equilibrium::StahlEquilibrium;
use crate::error::{Error, Result};
use crate::floor::{FloorRegime, FlooredEquilibrium};

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub price: f64,
    pub mass: f64,
}

/// Continuous piece of a pricing strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    /// The equilibrium CDF `1 - ((1-mu)/(n mu) (top/p - 1))^(1/(n-1))`
    /// restricted to `[lo, hi]`; carries the probability that CDF assigns there.
    StahlTail {
        top: f64,
        mu: f64,
        n: usize,
        lo: f64,
        hi: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
        mass: f64,
    },
}

impl Segment {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Segment::StahlTail { lo, hi, .. } | Segment::Uniform { lo, hi, .. } => (lo, hi),
        }
    }

    pub fn mass(&self) -> f64 {
        match *self {
            Segment::StahlTail { lo, hi, .. } => self.base_cdf(hi) - self.base_cdf(lo),
            Segment::Uniform { mass, .. } => mass,
        }
    }

    /// Probability this segment puts on prices `<= p`.
    pub fn mass_below(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p < lo {
            return 0.0;
        }
        if p >= hi {
            return self.mass();
        }
        match *self {
            Segment::StahlTail { .. } => self.base_cdf(p) - self.base_cdf(lo),
            Segment::Uniform { mass, .. } => mass * (p - lo) / (hi - lo),
        }
    }

    /// Conditional quantile: the price at conditional probability `v`.
    pub fn quantile(&self, v: f64) -> f64 {
        match *self {
            Segment::StahlTail { top, mu, n, lo, .. } => {
                let w = self.base_cdf(lo) + v * self.mass();
                stahl_quantile(top, mu, n, w)
            }
            Segment::Uniform { lo, hi, .. } => lo + v * (hi - lo),
        }
    }

    fn base_cdf(&self, p: f64) -> f64 {
        match *self {
            Segment::StahlTail { top, mu, n, .. } => {
                let k = (1.0 - mu) / (n as f64 * mu);
                let base = (k * (top / p - 1.0)).max(0.0);
                (1.0 - base.powf(1.0 / (n as f64 - 1.0))).clamp(0.0, 1.0)
            }
            Segment::Uniform { .. } => unreachable!("uniform segments have no base CDF"),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::Strategy(format!("bad segment support [{lo}, {hi}]")));
        }
        if let Segment::StahlTail { top, mu, n, .. } = *self {
            if n < 2 || !(mu > 0.0 && mu < 1.0) || hi > top * (1.0 + MASS_TOL) {
                return Err(Error::Strategy(format!(
                    "bad equilibrium segment: n = {n}, mu = {mu}, hi = {hi}, top = {top}"
                )));
            }
        }
        let m = self.mass();
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::Strategy(format!("segment mass {m} is not a probability")));
        }
        Ok(())
    }
}

#[inline]
fn stahl_quantile(top: f64, mu: f64, n: usize, w: f64) -> f64 {
    let a = n as f64 * mu / (1.0 - mu);
    top / (1.0 + a * (1.0 - w).powi(n as i32 - 1))
}

/// A seller's pricing strategy: point masses plus continuous segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellerStrategy {
    pub atoms: Vec<Atom>,
    pub segments: Vec<Segment>,
}

impl SellerStrategy {
    pub fn new(atoms: Vec<Atom>, segments: Vec<Segment>) -> Result<Self> {
        let s = SellerStrategy { atoms, segments };
        s.validate()?;
        Ok(s)
    }

    pub fn pure(price: f64) -> Result<Self> {
        Self::new(vec![Atom { price, mass: 1.0 }], Vec::new())
    }

    pub fn from_equilibrium(eq: &StahlEquilibrium) -> Self {
        SellerStrategy {
            atoms: Vec::new(),
            segments: vec![Segment::StahlTail {
                top: eq.p_m,
                mu: eq.params.mu,
                n: eq.params.n,
                lo: eq.p_l,
                hi: eq.p_m,
            }],
        }
    }

    pub fn from_floored(eq: &FlooredEquilibrium) -> Result<Self> {
        let params = &eq.params;
        match eq.regime {
            FloorRegime::PureBertrand => Self::pure(eq.floor),
            FloorRegime::Inactive => {
                let lo = eq.p_m * (1.0 - params.mu) / (1.0 + (params.n as f64 - 1.0) * params.mu);
                Self::new(
                    Vec::new(),
                    vec![Segment::StahlTail {
                        top: eq.p_m,
                        mu: params.mu,
                        n: params.n,
                        lo,
                        hi: eq.p_m,
                    }],
                )
            }
            FloorRegime::MassPoint => {
                let p_n = eq
                    .p_n
                    .ok_or_else(|| Error::Strategy("mass-point equilibrium without P_N".into()))?;
                Self::new(
                    vec![Atom {
                        price: eq.floor,
                        mass: eq.rho,
                    }],
                    vec![Segment::StahlTail {
                        top: eq.p_m,
                        mu: params.mu,
                        n: params.n,
                        lo: p_n,
                        hi: eq.p_m,
                    }],
                )
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() && self.segments.is_empty() {
            return Err(Error::Strategy("empty strategy".into()));
        }
        for a in &self.atoms {
            if !(a.price.is_finite() && a.price >= 0.0) {
                return Err(Error::Strategy(format!("bad atom price {}", a.price)));
            }
            if !(a.mass.is_finite() && a.mass >= 0.0) {
                return Err(Error::Strategy(format!("bad atom mass {}", a.mass)));
            }
        }
        for s in &self.segments {
            s.validate()?;
        }
        let total = self.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Strategy(format!("probabilities sum to {total}, not 1")));
        }

        // (lo, hi, is_atom) sorted by position; neighbours must not overlap.
        let mut pieces: Vec<(f64, f64, bool)> = self
            .atoms
            .iter()
            .map(|a| (a.price, a.price, true))
            .chain(self.segments.iter().map(|s| {
                let (lo, hi) = s.support();
                (lo, hi, false)
            }))
            .collect();
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        for w in pieces.windows(2) {
            let (prev, next) = (w[0], w[1]);
            let overlap = if prev.2 || next.2 {
                next.0 <= prev.1
            } else {
                next.0 < prev.1
            };
            if overlap {
                return Err(Error::Strategy(format!(
                    "overlapping pieces [{}, {}] and [{}, {}]",
                    prev.0, prev.1, next.0, next.1
                )));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.segments.iter().map(Segment::mass).sum::<f64>()
    }

    pub fn is_pure(&self) -> bool {
        self.segments.is_empty() && self.atoms.iter().filter(|a| a.mass > 0.0).count() == 1
    }

    pub fn max_price(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| a.price)
            .chain(self.segments.iter().map(|s| s.support().1))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Pr(price <= p)`.
    pub fn cdf(&self, p: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.price <= p).map(|a| a.mass).sum();
        let segs: f64 = self.segments.iter().map(|s| s.mass_below(p)).sum();
        (atoms + segs).min(1.0)
    }

    /// `Pr(price == p)`.
    pub fn atom_mass_at(&self, p: f64) -> f64 {
        self.atoms.iter().filter(|a| a.price == p).map(|a| a.mass).sum()
    }

    pub(crate) fn sampler(&self) -> Sampler {
        let mut cum = 0.0;
        let mut pieces = Vec::with_capacity(self.atoms.len() + self.segments.len());
        for a in &self.atoms {
            cum += a.mass;
            pieces.push((cum, Piece::Atom(a.price)));
        }
        for s in &self.segments {
            let mass = s.mass();
            let from = cum;
            cum += mass;
            let piece = match *s {
                Segment::StahlTail { top, mu, n, lo, .. } => {
                    let base_lo = s.base_cdf(lo);
                    Piece::Stahl {
                        from,
                        mass,
                        base_lo,
                        top,
                        a: n as f64 * mu / (1.0 - mu),
                        power: n as i32 - 1,
                    }
                }
                Segment::Uniform { lo, hi, .. } => Piece::Uniform { from, mass, lo, hi },
            };
            pieces.push((cum, piece));
        }
        Sampler { pieces }
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Atom(f64),
    Stahl {
        from: f64,
        mass: f64,
        base_lo: f64,
        top: f64,
        a: f64,
        power: i32,
    },
    Uniform {
        from: f64,
        mass: f64,
        lo: f64,
        hi: f64,
    },
}

/// Inverse-transform sampler with precomputed cumulative masses.
#[derive(Debug, Clone)]
pub(crate) struct Sampler {
    pieces: Vec<(f64, Piece)>,
}

impl Sampler {
    #[inline]
    pub(crate) fn sample(&self, u: f64) -> f64 {
        let idx = self
            .pieces
            .iter()
            .position(|(cum, _)| u < *cum)
            .unwrap_or(self.pieces.len() - 1);
        match self.pieces[idx].1 {
            Piece::Atom(p) => p,
            Piece::Stahl {
                from,
                mass,
                base_lo,
                top,
                a,
                power,
            } => {
                let v = ((u - from) / mass).clamp(0.0, 1.0);
                let w = base_lo + v * mass;
                top / (1.0 + a * (1.0 - w).powi(power))
            }
            Piece::Uniform { from, mass, lo, hi } => {
                let v = ((u - from) / mass).clamp(0.0, 1.0);
                lo + v * (hi - lo)
            }
        }
    }
}
