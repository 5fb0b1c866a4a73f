//! `stahl-floor`: solve, sweep and verify minimum-price equilibria of the
//! Stahl search market from the command line.

mod args;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "stahl-floor", version, about = "Minimum-price equilibria in the Stahl search market")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unfloored symmetric equilibrium.
    Solve(Market),
    /// Equilibrium under a minimum price --pc.
    Floor {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        pc: String,
    },
    /// Grid sweeps, CSV by default. `pm3-pm2` and `pm-pstar` report prices in units of c.
    Sweep {
        #[command(flatten)]
        market: Market,
        #[arg(long, value_enum)]
        kind: SweepKind,
        /// Grid `lo:hi:step` over mu, or over floors for `epo-floor`.
        #[arg(long)]
        range: Option<String>,
        /// Number of floors (`epo-floor`) or rho points (`residual-surface`).
        #[arg(long)]
        grid: Option<usize>,
        /// Fixed floor for `residual-surface`; defaults to P* at each mu.
        #[arg(long)]
        pc: Option<String>,
    },
    /// Monte-Carlo market under the (optionally floored) equilibrium profile.
    Simulate {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        pc: Option<String>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Best-response deviation scan; exits 1 if a deviation pays.
    Verify {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        pc: Option<String>,
        /// Number of deviation prices.
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Two-seller mass-point consistency residual at (--pc, --rho).
    Residual {
        #[command(flatten)]
        market: Market,
        /// Floor; defaults to P*.
        #[arg(long)]
        pc: Option<String>,
        #[arg(long)]
        rho: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Market {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Shopper share, decimal or fraction such as `1/3`.
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long, default_value = "1")]
    pub c: String,
    /// Optional valuation cap M.
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report prices divided by the search cost.
    #[arg(long)]
    pub in_c_units: bool,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    /// P_M(n=3) - P_M(n=2) over mu.
    Pm3Pm2,
    /// P_M - P* over mu.
    PmPstar,
    /// Floored EPO over floors.
    EpoFloor,
    /// Mass-point residual over (mu, rho).
    ResidualSurface,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(status) => status,
        Err(err) => {
            let body = serde_json::json!({
                "error": { "kind": err.kind(), "message": err.to_string() }
            });
            println!("{body}");
            ExitCode::from(2)
        }
    }
}

impl Market {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
