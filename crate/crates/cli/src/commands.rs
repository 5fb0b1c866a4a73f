use std::fmt;
use std::process::ExitCode;

use serde_json::{json, Value};
use stahl_core::sim::{
    best_response_grid, simulate_market, DeviationReport, Estimate, SellerStrategy, SimConfig,
    SimReport,
};
use stahl_core::{
    beta_ratio, kappa, mass_consistency_residual, p_star, shopper_expected_min,
    solve_floored, solve_reserve_price, FloorRegime, ModelParams, StahlEquilibrium,
};

use crate::args::{parse_number, Range, UsageError};
use crate::output::{emit, num, opt, Artifact, Format, Table};
use crate::{Command, Market, SimArgs, SweepKind};

#[derive(Debug)]
pub enum CliError {
    Model(stahl_core::Error),
    Usage(UsageError),
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Model(e) => e.kind(),
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Model(e) => e.fmt(f),
            CliError::Usage(e) => e.fmt(f),
            CliError::Io(e) => f.write_str(e),
        }
    }
}

impl From<stahl_core::Error> for CliError {
    fn from(e: stahl_core::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(UsageError(msg.into()))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("domain types serialize")
}

impl Market {
    fn params_with_mu(&self, mu: f64) -> CliResult<ModelParams> {
        let c = parse_number(&self.c)?;
        let mut params = ModelParams::new(self.n, c, mu)?;
        if let Some(m) = &self.m {
            params = params.with_valuation_cap(parse_number(m)?)?;
        }
        Ok(params)
    }

    fn params(&self) -> CliResult<ModelParams> {
        let mu = self.mu.as_deref().ok_or_else(|| usage("--mu is required"))?;
        self.params_with_mu(parse_number(mu)?)
    }

    fn unit(&self) -> CliResult<f64> {
        Ok(if self.in_c_units { parse_number(&self.c)? } else { 1.0 })
    }

    fn units_label(&self) -> &'static str {
        if self.in_c_units {
            "c"
        } else {
            "currency"
        }
    }
}

fn parse_opt(s: &Option<String>) -> CliResult<Option<f64>> {
    Ok(s.as_deref().map(parse_number).transpose()?)
}

pub fn run(command: &Command) -> CliResult<ExitCode> {
    let (artifact, market, default_format, ok) = match command {
        Command::Solve(market) => (solve(market)?, market, Format::Json, true),
        Command::Floor { market, pc } => (floor(market, parse_number(pc)?)?, market, Format::Json, true),
        Command::Sweep {
            market,
            kind,
            range,
            grid,
            pc,
        } => {
            let range = range.as_deref().map(Range::parse).transpose()?;
            (sweep(market, *kind, range, *grid, parse_opt(pc)?)?, market, Format::Csv, true)
        }
        Command::Simulate { market, pc, sim } => {
            (simulate(market, parse_opt(pc)?, sim)?, market, Format::Json, true)
        }
        Command::Verify {
            market,
            pc,
            grid,
            sim,
        } => {
            let (artifact, pass) = verify(market, parse_opt(pc)?, *grid, sim)?;
            (artifact, market, Format::Json, pass)
        }
        Command::Residual { market, pc, rho } => {
            (residual(market, parse_opt(pc)?, parse_number(rho)?)?, market, Format::Json, true)
        }
    };
    emit(&artifact, market.format_or(default_format), market.out.as_deref())
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn solve(market: &Market) -> CliResult<Artifact> {
    let params = market.params()?;
    let eq = solve_reserve_price(&params)?;
    let u = market.unit()?;
    let ps = p_star(&params)?;
    let beta = beta_ratio(&eq);
    let shopper = shopper_expected_min(&eq)?;
    let kappa = if params.n == 2 { Some(kappa(params.mu)?) } else { None };
    let json = json!({
        "params": to_value(&params),
        "p_m": eq.p_m / u,
        "p_l": eq.p_l / u,
        "g_ratio": eq.g_ratio,
        "epo": eq.epo / u,
        "p_star": ps / u,
        "beta": beta,
        "kappa": kappa,
        "shopper_expected_min": shopper / u,
        "units": market.units_label(),
    });
    let mut table = Table::new(vec![
        "n", "mu", "c", "p_m", "p_l", "g_ratio", "epo", "p_star", "beta", "shopper_expected_min",
    ]);
    table.push(vec![
        params.n.to_string(),
        num(params.mu),
        num(params.c),
        num(eq.p_m / u),
        num(eq.p_l / u),
        num(eq.g_ratio),
        num(eq.epo / u),
        num(ps / u),
        num(beta),
        num(shopper / u),
    ]);
    Ok(Artifact { json, table })
}

fn floor(market: &Market, p_c: f64) -> CliResult<Artifact> {
    let params = market.params()?;
    let eq = solve_reserve_price(&params)?;
    let f = solve_floored(&eq, p_c)?;
    let u = market.unit()?;
    let json = json!({
        "params": to_value(&params),
        "regime": f.regime,
        "floor": f.floor / u,
        "rho": f.rho,
        "p_n": f.p_n.map(|x| x / u),
        "p_m": f.p_m / u,
        "epo": f.epo / u,
        "reserve": f.reserve / u,
        "unfloored_epo": eq.epo / u,
        "p_star": p_star(&params)? / u,
        "units": market.units_label(),
    });
    let mut table = Table::new(vec![
        "n", "mu", "c", "regime", "floor", "rho", "p_n", "p_m", "epo", "reserve", "unfloored_epo",
    ]);
    table.push(vec![
        params.n.to_string(),
        num(params.mu),
        num(params.c),
        f.regime.as_str().to_string(),
        num(f.floor / u),
        num(f.rho),
        opt(f.p_n.map(|x| x / u)),
        num(f.p_m / u),
        num(f.epo / u),
        num(f.reserve / u),
        num(eq.epo / u),
    ]);
    Ok(Artifact { json, table })
}

fn table_to_json(table: &Table) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(k, v)| {
                    let value = v
                        .parse::<f64>()
                        .ok()
                        .and_then(|x| serde_json::Number::from_f64(x).map(Value::Number))
                        .unwrap_or_else(|| {
                            if v.is_empty() {
                                Value::Null
                            } else {
                                Value::String(v.clone())
                            }
                        });
                    (k.to_string(), value)
                })
                .collect();
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

fn sweep(
    market: &Market,
    kind: SweepKind,
    range: Option<Range>,
    grid: Option<usize>,
    pc: Option<f64>,
) -> CliResult<Artifact> {
    let u = market.unit()?;
    let mu_points = |default: &str| -> CliResult<Vec<f64>> {
        Ok(match range {
            Some(r) => r.points(),
            None => Range::parse(default)?.points(),
        })
    };
    let table = match kind {
        SweepKind::Pm3Pm2 => {
            let mut t = Table::new(vec!["mu", "p_m2", "p_m3", "diff"]);
            for mu in mu_points("0.05:0.95:0.01")? {
                let base = market.params_with_mu(mu)?;
                let u = base.c;
                let two = solve_reserve_price(&ModelParams { n: 2, ..base })?;
                let three = solve_reserve_price(&ModelParams { n: 3, ..base })?;
                t.push(vec![
                    num(mu),
                    num(two.p_m / u),
                    num(three.p_m / u),
                    num((three.p_m - two.p_m) / u),
                ]);
            }
            t
        }
        SweepKind::PmPstar => {
            let mut t = Table::new(vec!["mu", "p_m", "p_star", "diff", "beta"]);
            for mu in mu_points("0.05:0.95:0.01")? {
                let params = market.params_with_mu(mu)?;
                let u = params.c;
                let eq = solve_reserve_price(&params)?;
                let ps = p_star(&params)?;
                t.push(vec![
                    num(mu),
                    num(eq.p_m / u),
                    num(ps / u),
                    num((eq.p_m - ps) / u),
                    num(beta_ratio(&eq)),
                ]);
            }
            t
        }
        SweepKind::EpoFloor => {
            let params = market.params()?;
            let eq = solve_reserve_price(&params)?;
            let floors = match range {
                Some(r) => r.points(),
                None => default_floors(&eq, grid.unwrap_or(200))?,
            };
            let mut t = Table::new(vec![
                "floor", "regime", "rho", "p_n", "p_m", "epo", "reserve", "unfloored_epo",
            ]);
            for p_c in floors {
                let f = solve_floored(&eq, p_c)?;
                t.push(vec![
                    num(f.floor / u),
                    f.regime.as_str().to_string(),
                    num(f.rho),
                    opt(f.p_n.map(|x| x / u)),
                    num(f.p_m / u),
                    num(f.epo / u),
                    num(f.reserve / u),
                    num(eq.epo / u),
                ]);
            }
            t
        }
        SweepKind::ResidualSurface => {
            let k = grid.unwrap_or(99);
            if k == 0 {
                return Err(usage("--grid must be >= 1"));
            }
            let mut t = Table::new(vec!["mu", "rho", "pc", "residual"]);
            for mu in mu_points("0.01:0.99:0.01")? {
                let params = market.params_with_mu(mu)?;
                let p_c = match pc {
                    Some(p) => p,
                    None => p_star(&params)?,
                };
                for j in 1..=k {
                    let rho = j as f64 / (k + 1) as f64;
                    let r = mass_consistency_residual(&params, p_c, rho)?;
                    t.push(vec![num(mu), num(rho), num(p_c / u), num(r)]);
                }
            }
            t
        }
    };
    Ok(Artifact {
        json: table_to_json(&table),
        table,
    })
}

/// `count` floors evenly spaced over `[P_L / 2, P_M]`.
fn default_floors(eq: &StahlEquilibrium, count: usize) -> CliResult<Vec<f64>> {
    if count < 2 {
        return Err(usage("--grid must be >= 2 for epo-floor"));
    }
    let (lo, hi) = (0.5 * eq.p_l, eq.p_m);
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

struct Profile {
    params: ModelParams,
    strategy: SellerStrategy,
    reserve: f64,
    regime: FloorRegime,
    floor: Option<f64>,
    bottom: f64,
}

fn profile(market: &Market, pc: Option<f64>) -> CliResult<Profile> {
    let params = market.params()?;
    let eq = solve_reserve_price(&params)?;
    Ok(match pc {
        None => Profile {
            params,
            strategy: SellerStrategy::from_equilibrium(&eq),
            reserve: eq.p_m,
            regime: FloorRegime::Inactive,
            floor: None,
            bottom: 0.5 * eq.p_l,
        },
        Some(p_c) => {
            let f = solve_floored(&eq, p_c)?;
            Profile {
                params,
                strategy: SellerStrategy::from_floored(&f)?,
                reserve: f.reserve,
                regime: f.regime,
                floor: Some(p_c),
                bottom: p_c,
            }
        }
    })
}

fn sim_config(sim: &SimArgs) -> SimConfig {
    SimConfig::new(sim.trials, sim.seed).with_workers(sim.workers)
}

fn scale(e: Estimate, u: f64) -> Estimate {
    Estimate {
        mean: e.mean / u,
        se: e.se / u,
    }
}

fn scaled_report(r: &SimReport, u: f64) -> SimReport {
    SimReport {
        trials: r.trials,
        epo_hat: scale(r.epo_hat, u),
        profit_hat: r.profit_hat.iter().map(|&e| scale(e, u)).collect(),
        searcher_cost_hat: scale(r.searcher_cost_hat, u),
        search_fee_hat: scale(r.search_fee_hat, u),
        shopper_price_hat: scale(r.shopper_price_hat, u),
        market_share: r.market_share.clone(),
    }
}

fn simulate(market: &Market, pc: Option<f64>, sim: &SimArgs) -> CliResult<Artifact> {
    let p = profile(market, pc)?;
    let strategies = vec![p.strategy.clone(); p.params.n];
    let report = simulate_market(&p.params, &strategies, p.reserve, &sim_config(sim))?;
    let u = market.unit()?;
    let r = scaled_report(&report, u);
    let mut json = to_value(&r);
    json["params"] = to_value(&p.params);
    json["regime"] = to_value(&p.regime);
    json["floor"] = to_value(&p.floor.map(|x| x / u));
    json["reserve"] = json!(p.reserve / u);
    json["units"] = json!(market.units_label());
    let mut table = Table::new(vec!["seller", "profit", "profit_se", "share", "share_se"]);
    for (i, (pi, q)) in r.profit_hat.iter().zip(&r.market_share).enumerate() {
        table.push(vec![i.to_string(), num(pi.mean), num(pi.se), num(q.mean), num(q.se)]);
    }
    Ok(Artifact { json, table })
}

fn scaled_deviation(r: &DeviationReport, u: f64) -> DeviationReport {
    let mut out = r.clone();
    out.grid.iter_mut().for_each(|x| *x /= u);
    for g in &mut out.profit_at {
        g.price /= u;
        g.analytic /= u;
        g.simulated = scale(g.simulated, u);
        g.gain = scale(g.gain, u);
    }
    out.equilibrium_profit /= u;
    out.equilibrium_profit_sim = scale(out.equilibrium_profit_sim, u);
    out.margin /= u;
    out.margin_sim = scale(out.margin_sim, u);
    out.argmax_price /= u;
    out
}

fn verify(market: &Market, pc: Option<f64>, points: usize, sim: &SimArgs) -> CliResult<(Artifact, bool)> {
    if points == 0 {
        return Err(usage("--grid must be >= 1"));
    }
    let p = profile(market, pc)?;
    let top = p.reserve + p.params.c;
    let grid: Vec<f64> = if points == 1 {
        vec![p.bottom]
    } else {
        (0..points)
            .map(|i| p.bottom + (top - p.bottom) * i as f64 / (points - 1) as f64)
            .collect()
    };
    let report = best_response_grid(&p.params, &p.strategy, p.reserve, &grid, &sim_config(sim))?;
    let pass = report.passes();
    let u = market.unit()?;
    let r = scaled_deviation(&report, u);
    let mut json = to_value(&r);
    json["params"] = to_value(&p.params);
    json["regime"] = to_value(&p.regime);
    json["reserve"] = json!(p.reserve / u);
    json["analytic_pass"] = json!(report.analytic_pass());
    json["simulated_pass"] = json!(report.simulated_pass());
    json["pass"] = json!(pass);
    json["units"] = json!(market.units_label());
    let mut table = Table::new(vec!["price", "analytic", "simulated", "simulated_se", "gain", "gain_se"]);
    for g in &r.profit_at {
        table.push(vec![
            num(g.price),
            num(g.analytic),
            num(g.simulated.mean),
            num(g.simulated.se),
            num(g.gain.mean),
            num(g.gain.se),
        ]);
    }
    Ok((Artifact { json, table }, pass))
}

fn residual(market: &Market, pc: Option<f64>, rho: f64) -> CliResult<Artifact> {
    let params = market.params()?;
    let p_c = match pc {
        Some(p) => p,
        None => p_star(&params)?,
    };
    let r = mass_consistency_residual(&params, p_c, rho)?;
    let u = market.unit()?;
    let json = json!({
        "params": to_value(&params),
        "pc": p_c / u,
        "rho": rho,
        "residual": r,
        "units": market.units_label(),
    });
    let mut table = Table::new(vec!["mu", "c", "pc", "rho", "residual"]);
    table.push(vec![num(params.mu), num(params.c), num(p_c / u), num(rho), num(r)]);
    Ok(Artifact { json, table })
}
