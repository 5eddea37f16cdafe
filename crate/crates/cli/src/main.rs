//! `msd`: dominance checks, benchmark-dominating portfolios and rolling
//! backtests.

mod backtest;
mod check;
mod optimize;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use msd_core::{Criterion, ExternalAdapter, ExternalKind, Limits, NativeAdapter, ReferenceMode, SolverAdapter};

#[derive(Parser, Debug)]
#[command(name = "msd", version, about = "Markowitz stochastic dominance checks and portfolio search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a candidate dominates a benchmark.
    Check(check::CheckArgs),
    /// Find the highest-mean portfolio that dominates a benchmark.
    Optimize(optimize::OptimizeArgs),
    /// Run the rolling-window study on monthly data.
    Backtest(backtest::BacktestArgs),
}

/// `msd`, `mwsd` or `fsd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Fsd,
    Msd,
    Mwsd,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Fsd => Criterion::Fsd,
            CriterionArg::Msd => Criterion::Msd,
            CriterionArg::Mwsd => Criterion::Mwsd,
        }
    }
}

/// A literal reference point or a rule for deriving one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceArg {
    Value(f64),
    Mode(ReferenceMode),
}

impl FromStr for ReferenceArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(v) = s.parse::<f64>() {
            return if v.is_finite() { Ok(Self::Value(v)) } else { Err(format!("reference `{s}` is not finite")) };
        }
        s.parse::<ReferenceMode>()
            .map(Self::Mode)
            .map_err(|_| format!("expected a number, `rf` or `median`, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    /// Built-in branch-and-bound.
    Native,
    Highs,
    Cbc,
    /// The binary named by the MSD_SOLVER_BIN environment variable.
    Env,
}

#[derive(Args, Debug, Clone)]
pub struct SolverOpts {
    #[arg(long, value_enum, default_value = "native")]
    pub solver: SolverArg,
    /// Path to the highs or cbc binary (default: look up on PATH).
    #[arg(long)]
    pub solver_bin: Option<PathBuf>,
    /// Wall-clock limit per MILP, seconds.
    #[arg(long, default_value_t = 600.0)]
    pub time_limit: f64,
    /// Relative MIP gap.
    #[arg(long, default_value_t = 1e-6)]
    pub mip_gap: f64,
}

impl SolverOpts {
    pub fn limits(&self) -> anyhow::Result<Limits> {
        anyhow::ensure!(self.time_limit > 0.0, "--time-limit must be positive");
        anyhow::ensure!(self.mip_gap >= 0.0, "--mip-gap must be non-negative");
        Ok(Limits {
            time: Duration::from_secs_f64(self.time_limit),
            gap: self.mip_gap,
        })
    }

    pub fn adapter(&self) -> anyhow::Result<Box<dyn SolverAdapter>> {
        let external = |kind: ExternalKind, default: &str| {
            let bin = self.solver_bin.clone().unwrap_or_else(|| PathBuf::from(default));
            Box::new(ExternalAdapter::new(bin, kind)) as Box<dyn SolverAdapter>
        };
        Ok(match self.solver {
            SolverArg::Native => Box::new(NativeAdapter::default()),
            SolverArg::Highs => external(ExternalKind::Highs, "highs"),
            SolverArg::Cbc => external(ExternalKind::Cbc, "cbc"),
            SolverArg::Env => Box::new(ExternalAdapter::from_env()?),
        })
    }
}

/// Rejects d flags outside MWSD and returns the thresholds to use.
pub fn thresholds(criterion: Criterion, d_minus: Option<f64>, d_plus: Option<f64>) -> anyhow::Result<(f64, f64)> {
    if criterion != Criterion::Mwsd {
        anyhow::ensure!(
            d_minus.is_none() && d_plus.is_none(),
            "--d-minus/--d-plus only apply to --criterion mwsd"
        );
        return Ok((1.0, 1.0));
    }
    let (a, b) = (d_minus.unwrap_or(0.18), d_plus.unwrap_or(0.18));
    for (name, v) in [("--d-minus", a), ("--d-plus", b)] {
        anyhow::ensure!((0.0..=1.0).contains(&v), "{name} must lie in [0, 1], got {v}");
    }
    Ok((a, b))
}

/// Exit status: 0 success or dominance, 1 negative outcome, 2 error.
pub type Outcome = anyhow::Result<u8>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => check::run(a),
        Command::Optimize(a) => optimize::run(a),
        Command::Backtest(a) => backtest::run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
