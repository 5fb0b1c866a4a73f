use super::strategy::SellerStrategy;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::integrate;

/// Exact expected profit of posting `p` against `n - 1` opponents who all
/// play `opponents`, with searchers using `reserve`.
///
/// At or below the reserve the seller keeps the searchers who start with her,
/// `(1 - mu) / n`, plus her expected share of shoppers, including exact tie
/// splitting against opponent atoms at `p`. Above the reserve she sells
/// nothing, because every searcher finds an acceptable price elsewhere.
pub fn analytic_profit(
    params: &ModelParams,
    p: f64,
    opponents: &SellerStrategy,
    reserve: f64,
) -> Result<f64> {
    params.validate()?;
    opponents.validate()?;
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::domain("p", format!("price must be > 0, got {p}")));
    }
    if !(reserve.is_finite() && reserve > 0.0) {
        return Err(Error::domain("reserve", format!("reserve must be > 0, got {reserve}")));
    }
    if opponents.max_price() > reserve {
        return Err(Error::Unsupported(format!(
            "opponents price up to {} above the reserve {reserve}; searcher beliefs off path",
            opponents.max_price()
        )));
    }
    Ok(profit_unchecked(params, p, opponents, reserve))
}

fn profit_unchecked(params: &ModelParams, p: f64, opponents: &SellerStrategy, reserve: f64) -> f64 {
    if p > reserve {
        return 0.0;
    }
    let n = params.n;
    let tie = opponents.atom_mass_at(p);
    let above = (1.0 - opponents.cdf(p)).max(0.0);
    p * (params.mu * shopper_share(n - 1, tie, above) + (1.0 - params.mu) / n as f64)
}

/// Expected shopper share against `others` independent opponents, each
/// pricing above `p` with probability `above` and exactly at `p` with
/// probability `tie`: `sum_k C(others, k) tie^k above^(others-k) / (k + 1)`.
fn shopper_share(others: usize, tie: f64, above: f64) -> f64 {
    if tie == 0.0 {
        return above.powi(others as i32);
    }
    let mut binom = 1.0;
    let mut total = 0.0;
    for k in 0..=others {
        total += binom * tie.powi(k as i32) * above.powi((others - k) as i32) / (k + 1) as f64;
        binom = binom * (others - k) as f64 / (k + 1) as f64;
    }
    total
}

/// Expected profit of a seller who plays `strategy` when every opponent does
/// too: atoms summed exactly, segments integrated over their quantile.
pub fn expected_profit(params: &ModelParams, strategy: &SellerStrategy, reserve: f64) -> Result<f64> {
    // validates everything once
    analytic_profit(params, strategy.max_price().max(f64::MIN_POSITIVE), strategy, reserve)?;
    let mut total: f64 = strategy
        .atoms
        .iter()
        .filter(|a| a.mass > 0.0)
        .map(|a| a.mass * profit_unchecked(params, a.price, strategy, reserve))
        .sum();
    for seg in &strategy.segments {
        let mass = seg.mass();
        if mass == 0.0 {
            continue;
        }
        let tol = 1e-13 * reserve;
        let q = integrate(
            |v| profit_unchecked(params, seg.quantile(v), strategy, reserve),
            0.0,
            1.0,
            tol,
        )?;
        total += mass * q.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{quantile, solve_reserve_price};
    use crate::floor::{p_star, solve_floored};
    use crate::sim::strategy::{Atom, Segment};

    const THIRD: f64 = 1.0 / 3.0;

    #[test]
    fn shopper_share_brute_force() {
        // enumerate opponent outcomes {below, tie, above} for 3 opponents
        let (below, tie, above) = (0.2, 0.3, 0.5);
        let mut expected = 0.0;
        for a in 0..3usize.pow(3) {
            let outcome: Vec<usize> = (0..3).map(|i| (a / 3usize.pow(i)) % 3).collect();
            let prob: f64 = outcome.iter().map(|&o| [below, tie, above][o]).product();
            if outcome.contains(&0) {
                continue;
            }
            let ties = outcome.iter().filter(|&&o| o == 1).count();
            expected += prob / (ties + 1) as f64;
        }
        assert!((shopper_share(3, tie, above) - expected).abs() < 1e-15);
    }

    #[test]
    fn pure_profile_binding_deviation() {
        for (n, mu, c) in [(2, THIRD, 1.0), (3, 0.2, 2.0), (4, 0.6, 0.5)] {
            let params = ModelParams::new(n, c, mu).unwrap();
            let ps = p_star(&params).unwrap();
            let opp = SellerStrategy::pure(ps).unwrap();
            let reserve = ps + c;
            let at_floor = analytic_profit(&params, ps, &opp, reserve).unwrap();
            let up = analytic_profit(&params, ps + c, &opp, reserve).unwrap();
            assert!((at_floor - ps / n as f64).abs() < 1e-12);
            assert!((up - at_floor).abs() < 1e-12 * ps, "n={n}");
            assert_eq!(analytic_profit(&params, ps + 1.01 * c, &opp, reserve).unwrap(), 0.0);
        }
    }

    #[test]
    fn equal_profit_on_equilibrium_support() {
        let params = ModelParams::new(2, 1.0, THIRD).unwrap();
        let eq = solve_reserve_price(&params).unwrap();
        let opp = SellerStrategy::from_equilibrium(&eq);
        let target = eq.p_m * (1.0 - THIRD) / 2.0;
        for i in 0..=20 {
            let p = quantile(&eq, i as f64 / 20.0).unwrap();
            let pi = analytic_profit(&params, p, &opp, eq.p_m).unwrap();
            assert!((pi - target).abs() < 1e-12, "p={p}");
        }
        let avg = expected_profit(&params, &opp, eq.p_m).unwrap();
        assert!((avg - target).abs() < 1e-10);
        // below the support: undercutting wins all shoppers but earns less
        let low = analytic_profit(&params, 0.9 * eq.p_l, &opp, eq.p_m).unwrap();
        assert!(low < target);
    }

    #[test]
    fn mass_point_profit_at_floor() {
        let params = ModelParams::new(2, 1.0, THIRD).unwrap();
        let eq = solve_reserve_price(&params).unwrap();
        let f = solve_floored(&eq, 1.8).unwrap();
        let opp = SellerStrategy::from_floored(&f).unwrap();
        let at_floor = analytic_profit(&params, 1.8, &opp, f.reserve).unwrap();
        let expected = 1.8 * (f.rho / 2.0 + (1.0 - f.rho) * (1.0 + THIRD) / 2.0);
        assert!((at_floor - expected).abs() < 1e-14);
        // and equals profit at the top of the continuous part
        let top = analytic_profit(&params, f.p_m, &opp, f.reserve).unwrap();
        assert!((top - at_floor).abs() < 1e-12);
    }

    #[test]
    fn rejects_opponents_above_reserve() {
        let params = ModelParams::new(2, 1.0, THIRD).unwrap();
        let opp = SellerStrategy::new(
            vec![],
            vec![Segment::Uniform { lo: 1.0, hi: 4.0, mass: 1.0 }],
        )
        .unwrap();
        assert!(matches!(
            analytic_profit(&params, 2.0, &opp, 3.0),
            Err(Error::Unsupported(_))
        ));
        let ok = SellerStrategy::new(vec![Atom { price: 2.0, mass: 1.0 }], vec![]).unwrap();
        assert!(analytic_profit(&params, 0.0, &ok, 3.0).is_err());
    }
}
