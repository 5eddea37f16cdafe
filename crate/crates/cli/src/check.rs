use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use msd_core::dominance::DEFAULT_TOLERANCE;
use msd_core::{canonicalize, check, lower_median, read_values, Criterion, DiscreteReturnDistribution, DominanceSpec};
use serde::Serialize;

use crate::{thresholds, CriterionArg, Outcome, ReferenceArg};

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Candidate returns, one value per state.
    pub candidate: PathBuf,
    /// Benchmark returns on the same states.
    pub benchmark: PathBuf,
    /// State probabilities (default: equal).
    #[arg(long)]
    pub probs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "msd")]
    pub criterion: CriterionArg,
    /// Reference point: a number or `median` of the benchmark.
    #[arg(long, default_value = "0")]
    pub reference: ReferenceArg,
    #[arg(long)]
    pub d_minus: Option<f64>,
    #[arg(long)]
    pub d_plus: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Add a zero-probability state at the reference point when it is not a
    /// benchmark return.
    #[arg(long)]
    pub augment: bool,
    /// Print a JSON report (schema `msd.check.v1`).
    #[arg(long)]
    pub json: bool,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    criterion: Criterion,
    reference: f64,
    d_minus: f64,
    d_plus: f64,
    tolerance: f64,
    states: usize,
    augmented: bool,
    holds: bool,
    t_d_minus: f64,
    t_d_plus: f64,
    violations: Vec<msd_core::Violation>,
}

pub fn run(a: CheckArgs) -> Outcome {
    let criterion: Criterion = a.criterion.into();
    let (d_minus, d_plus) = thresholds(criterion, a.d_minus, a.d_plus)?;
    let read = |p: &PathBuf| read_values(p).with_context(|| format!("reading {}", p.display()));
    let mut x = read(&a.candidate)?;
    let mut y = read(&a.benchmark)?;
    anyhow::ensure!(
        x.len() == y.len(),
        "candidate has {} states, benchmark has {}",
        x.len(),
        y.len()
    );
    let mut probs = match &a.probs {
        Some(p) => read(p)?,
        None => vec![1.0 / y.len() as f64; y.len()],
    };
    let r = match a.reference {
        ReferenceArg::Value(v) => v,
        ReferenceArg::Mode(msd_core::ReferenceMode::Median) => {
            lower_median(&DiscreteReturnDistribution::new(y.clone(), probs.clone())?)
        }
        ReferenceArg::Mode(m) => anyhow::bail!("--reference {m} needs a risk-free series; pass a number"),
    };
    let on_grid = y.iter().any(|v| (v - r).abs() <= 1e-9);
    let augmented = !on_grid && criterion != Criterion::Fsd;
    if augmented {
        anyhow::ensure!(a.augment, "reference {r} is not a benchmark return; pass --augment to add a null state");
        x.push(r);
        y.push(r);
        probs.push(0.0);
    }
    let pair = canonicalize(&x, &y, &probs)?;
    let spec = match criterion {
        Criterion::Fsd => DominanceSpec::fsd(),
        Criterion::Msd => DominanceSpec::msd(r),
        Criterion::Mwsd => DominanceSpec::mwsd(r, d_minus, d_plus),
    }
    .with_tolerance(a.tolerance);
    let verdict = check(&pair, &spec)?;

    if a.json {
        let report = Report {
            schema: "msd.check.v1",
            criterion,
            reference: r,
            d_minus,
            d_plus,
            tolerance: a.tolerance,
            states: pair.len(),
            augmented,
            holds: verdict.holds,
            t_d_minus: verdict.t_d_minus,
            t_d_plus: verdict.t_d_plus,
            violations: verdict.violations.clone(),
        };
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        let name = criterion.to_string().to_uppercase();
        if verdict.holds {
            println!("{name}: candidate dominates benchmark (r = {r})");
        } else {
            println!("{name}: candidate does not dominate benchmark (r = {r})");
            for v in &verdict.violations {
                println!(
                    "  {:?} at {}: lhs {:.9} rhs {:.9} (short by {:.3e})",
                    v.condition,
                    v.at,
                    v.lhs,
                    v.rhs,
                    v.shortfall()
                );
            }
        }
        if criterion == Criterion::Mwsd {
            println!("  t_d- = {}, t_d+ = {}", verdict.t_d_minus, verdict.t_d_plus);
        }
        if augmented {
            println!("  null state added at r");
        }
    }
    Ok(if verdict.holds { 0 } else { 1 })
}
