use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use msd_core::data::geometric_mean_rate;
use msd_core::milp::SolveStats;
use msd_core::{
    build_m1, build_m2, certify, export_lp, export_mps, lower_median, read_state_table, read_values, solve, AssetPanel,
    BuildOptions, Criterion, DiscreteReturnDistribution, DominanceSpec, ReferenceMode, SolveStatus,
};
use serde::Serialize;

use crate::{thresholds, CriterionArg, Outcome, ReferenceArg, SolverOpts};

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Asset returns: one row per state, one column per asset, optional
    /// header of labels.
    #[arg(long)]
    pub assets: PathBuf,
    /// Benchmark returns, one value per state.
    #[arg(long)]
    pub benchmark: PathBuf,
    /// State probabilities (default: equal).
    #[arg(long)]
    pub probs: Option<PathBuf>,
    /// T-bill rates per state, for `--reference rf`.
    #[arg(long)]
    pub riskfree: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "msd")]
    pub criterion: CriterionArg,
    /// A number, `median` or `rf`.
    #[arg(long, default_value = "median")]
    pub reference: ReferenceArg,
    #[arg(long)]
    pub d_minus: Option<f64>,
    #[arg(long)]
    pub d_plus: Option<f64>,
    /// Multiplier on every derived big-M constant.
    #[arg(long, default_value_t = 1.0)]
    pub big_m_scale: f64,
    /// Restrict weights to multiples of 1/STEPS.
    #[arg(long)]
    pub lattice_steps: Option<u32>,
    /// Build only the published constraint families: no upper-tail row at
    /// the reference point, conditional FSD rows by lagged CDF alone. The
    /// solution is still certified against the exact criterion and reported
    /// as uncertified when it fails.
    #[arg(long)]
    pub literal: bool,
    #[arg(long)]
    pub export_lp: Option<PathBuf>,
    #[arg(long)]
    pub export_mps: Option<PathBuf>,
    /// Write the requested model files and stop.
    #[arg(long)]
    pub export_only: bool,
    /// Write the solution report (schema `msd.optimize.v1`) here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub solver: SolverOpts,
}

#[derive(Serialize)]
struct Weight<'a> {
    label: &'a str,
    weight: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    model: &'a str,
    criterion: Criterion,
    reference: f64,
    d_minus: f64,
    d_plus: f64,
    states: usize,
    augmented: bool,
    status: SolveStatus,
    portfolio_mean: Option<f64>,
    benchmark_mean: f64,
    excess: Option<f64>,
    weights: Vec<Weight<'a>>,
    certified: Option<bool>,
    stats: &'a SolveStats,
    message: Option<&'a str>,
}

/// Benchmark-sorted panel with `r` on its grid.
struct Prepared {
    panel: AssetPanel,
    benchmark: DiscreteReturnDistribution,
    r: f64,
    augmented: bool,
}

fn prepare(a: &OptimizeArgs) -> anyhow::Result<Prepared> {
    let ctx = |p: &PathBuf| format!("reading {}", p.display());
    let (labels, assets) = read_state_table(&a.assets).with_context(|| ctx(&a.assets))?;
    let y = read_values(&a.benchmark).with_context(|| ctx(&a.benchmark))?;
    let n = y.len();
    anyhow::ensure!(assets[0].len() == n, "assets have {} states, benchmark has {n}", assets[0].len());
    let probs = match &a.probs {
        Some(p) => read_values(p).with_context(|| ctx(p))?,
        None => vec![1.0 / n as f64; n],
    };
    anyhow::ensure!(probs.len() == n, "{} probabilities for {n} states", probs.len());
    let r = match a.reference {
        ReferenceArg::Value(v) => v,
        ReferenceArg::Mode(ReferenceMode::Median) => lower_median(&DiscreteReturnDistribution::new(y.clone(), probs.clone())?),
        ReferenceArg::Mode(ReferenceMode::RiskFree) => {
            let path = a.riskfree.as_ref().context("--reference rf needs --riskfree")?;
            geometric_mean_rate(&read_values(path).with_context(|| ctx(path))?)?
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &k| y[i].total_cmp(&y[k]));
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut ps: Vec<f64> = order.iter().map(|&i| probs[i]).collect();
    let mut xs: Vec<Vec<f64>> = assets.iter().map(|c| order.iter().map(|&i| c[i]).collect()).collect();
    let augmented = !ys.iter().any(|v| (v - r).abs() <= 1e-9);
    if augmented {
        let at = ys.partition_point(|&v| v < r);
        ys.insert(at, r);
        ps.insert(at, 0.0);
        for c in &mut xs {
            c.insert(at, r);
        }
    }
    Ok(Prepared {
        panel: AssetPanel::new(xs, labels, ps.clone())?,
        benchmark: DiscreteReturnDistribution::new(ys, ps)?,
        r,
        augmented,
    })
}

pub fn run(a: OptimizeArgs) -> Outcome {
    let criterion: Criterion = a.criterion.into();
    anyhow::ensure!(criterion != Criterion::Fsd, "optimize supports msd and mwsd");
    let (d_minus, d_plus) = thresholds(criterion, a.d_minus, a.d_plus)?;
    anyhow::ensure!(
        !a.export_only || a.export_lp.is_some() || a.export_mps.is_some(),
        "--export-only needs --export-lp or --export-mps"
    );
    anyhow::ensure!(a.big_m_scale >= 1.0, "--big-m-scale below 1 cuts off feasible portfolios");
    let p = prepare(&a)?;
    let options = BuildOptions {
        big_m_scale: a.big_m_scale,
        lattice_steps: a.lattice_steps,
        ..if a.literal { BuildOptions::literal() } else { BuildOptions::default() }
    };
    let bounds = p.panel.support(&p.benchmark, p.r)?;
    let model = match criterion {
        Criterion::Mwsd => build_m2(&p.panel, &p.benchmark, p.r, d_minus, d_plus, bounds, options)?,
        _ => build_m1(&p.panel, &p.benchmark, p.r, bounds, options)?,
    };
    if let Some(path) = &a.export_lp {
        export_lp(&model, path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.export_mps {
        export_mps(&model, path).with_context(|| format!("writing {}", path.display()))?;
    }
    if a.export_only {
        eprintln!(
            "wrote {} ({} columns, {} rows)",
            model.name,
            model.num_vars(),
            model.num_constraints()
        );
        return Ok(0);
    }

    let adapter = a.solver.adapter()?;
    let out = solve(&model, adapter.as_ref(), &a.solver.limits()?)?;
    let spec = match criterion {
        Criterion::Mwsd => DominanceSpec::mwsd(p.r, d_minus, d_plus),
        _ => DominanceSpec::msd(p.r),
    };
    let certified = if out.is_optimal() {
        Some(certify(&out, &p.panel, &p.benchmark, &spec)?.holds)
    } else {
        None
    };
    let means = p.panel.expected_returns();
    let mean = (!out.weights.is_empty()).then(|| means.iter().zip(&out.weights).map(|(m, l)| m * l).sum::<f64>());
    let benchmark_mean = p.benchmark.expected_return();
    let report = Report {
        schema: "msd.optimize.v1",
        model: &model.name,
        criterion,
        reference: p.r,
        d_minus,
        d_plus,
        states: p.benchmark.len(),
        augmented: p.augmented,
        status: out.status,
        portfolio_mean: mean,
        benchmark_mean,
        excess: mean.map(|m| m - benchmark_mean),
        weights: p
            .panel
            .labels()
            .iter()
            .zip(&out.weights)
            .map(|(l, &weight)| Weight { label: l, weight })
            .collect(),
        certified,
        stats: &out.stats,
        message: out.message.as_deref(),
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(path) = &a.output {
        std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    if a.json {
        print!("{json}");
    } else {
        println!("status: {}", out.status);
        println!("reference: {}{}", p.r, if p.augmented { " (null state added)" } else { "" });
        if let Some(m) = mean {
            println!("portfolio mean: {m:.6}  benchmark mean: {benchmark_mean:.6}  excess: {:.6}", m - benchmark_mean);
            for w in report.weights.iter().filter(|w| w.weight > 1e-6) {
                println!("  {:<12} {:.6}", w.label, w.weight);
            }
        }
        if let Some(c) = certified {
            println!("certified: {c}");
        }
    }
    if certified == Some(false) && !a.literal {
        anyhow::bail!("solver returned a portfolio that fails the dominance check");
    }
    Ok(match out.status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible | SolveStatus::TimeLimit => 1,
        SolveStatus::Error => 2,
    })
}
