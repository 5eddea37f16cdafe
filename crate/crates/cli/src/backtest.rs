use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use msd_core::data::{parse_ff49, parse_ff_factors, parse_series, parse_table, rolling_windows};
use msd_core::{emit_outputs, run_study, BuildOptions, Criterion, ReferenceMode, ReturnSeries, StudyConfig, YearMonth};

use crate::{CriterionArg, Outcome, SolverOpts};

#[derive(Args, Debug)]
pub struct BacktestArgs {
    /// Industry returns: a 49-industry portfolio file or any `YYYYMM` table.
    #[arg(long)]
    pub industries: PathBuf,
    /// Benchmark series (`YYYYMM,value`).
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    /// Column of the benchmark file to use.
    #[arg(long)]
    pub benchmark_column: Option<String>,
    /// T-bill series (`YYYYMM,value`).
    #[arg(long)]
    pub tbill: Option<PathBuf>,
    #[arg(long)]
    pub tbill_column: Option<String>,
    /// Factors file with `Mkt-RF` and `RF` columns. Supplies the market
    /// benchmark and the T-bill rate when those are not given separately.
    #[arg(long)]
    pub factors: Option<PathBuf>,
    /// First month to use (YYYYMM).
    #[arg(long)]
    pub start: Option<YearMonth>,
    /// Last month to use (YYYYMM).
    #[arg(long)]
    pub end: Option<YearMonth>,
    #[arg(long, default_value_t = 36)]
    pub window: usize,
    #[arg(long, default_value_t = 12)]
    pub step: usize,
    /// Only solve the first N windows.
    #[arg(long)]
    pub max_windows: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "msd,mwsd")]
    pub criteria: Vec<CriterionArg>,
    /// `rf`, `median` or both, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "rf,median")]
    pub reference: Vec<ReferenceMode>,
    #[arg(long, default_value_t = 0.18)]
    pub d_minus: f64,
    #[arg(long, default_value_t = 0.18)]
    pub d_plus: f64,
    /// Weights above this count as active.
    #[arg(long, default_value_t = msd_core::experiment::DEFAULT_W_EPS)]
    pub w_eps: f64,
    /// Concurrent solves.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "msd-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverOpts,
}

fn read_industries(path: &Path) -> anyhow::Result<Vec<ReturnSeries>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ff49 = text.lines().any(|l| {
        let l = l.to_ascii_lowercase();
        l.contains("value weighted") && l.contains("monthly")
    });
    Ok(if ff49 { parse_ff49(path)? } else { parse_table(path)? })
}

pub fn run(a: BacktestArgs) -> Outcome {
    let criteria: Vec<Criterion> = a.criteria.iter().map(|&c| c.into()).collect();
    anyhow::ensure!(!criteria.contains(&Criterion::Fsd), "--criteria takes msd and mwsd");
    let needs_rf = a.reference.contains(&ReferenceMode::RiskFree);

    let factors = match &a.factors {
        Some(p) => Some(parse_ff_factors(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let benchmark = match (&a.benchmark, &factors) {
        (Some(p), _) => parse_series(p, a.benchmark_column.as_deref()).with_context(|| format!("reading {}", p.display()))?,
        (None, Some((market, _))) => market.clone(),
        (None, None) => anyhow::bail!("no benchmark: pass --benchmark or --factors"),
    };
    let tbill = match (&a.tbill, &factors) {
        (Some(p), _) => Some(parse_series(p, a.tbill_column.as_deref()).with_context(|| format!("reading {}", p.display()))?),
        (None, Some((_, rf))) => Some(rf.clone()),
        (None, None) => None,
    };
    if needs_rf && tbill.is_none() {
        anyhow::bail!("--reference rf needs a T-bill series: pass --tbill or --factors");
    }
    let clip = |s: &ReturnSeries| s.clip(a.start, a.end);
    let industries: Vec<ReturnSeries> = read_industries(&a.industries)?.iter().map(clip).collect();
    let benchmark = clip(&benchmark);
    let tbill = tbill.as_ref().map(clip);

    let mut set = rolling_windows(&industries, &benchmark, tbill.as_ref(), a.window, a.step)?;
    for r in &set.rejected {
        let first = &r.missing[0];
        eprintln!(
            "window {} ({}-{}) skipped: {} missing observations, first {} {}",
            r.id,
            r.start,
            r.end,
            r.missing.len(),
            first.0,
            first.1
        );
    }
    if let Some(k) = a.max_windows {
        set.windows.truncate(k);
    }
    eprintln!(
        "{} windows of {} months, step {}, {} industries",
        set.windows.len(),
        a.window,
        a.step,
        industries.len()
    );

    let config = StudyConfig {
        criteria,
        references: a.reference.clone(),
        d_minus: a.d_minus,
        d_plus: a.d_plus,
        limits: a.solver.limits()?,
        w_eps: a.w_eps,
        jobs: a.jobs,
        build: BuildOptions::default(),
    };
    let adapter = a.solver.adapter()?;
    let (results, summary) = run_study(&set.windows, &config, adapter.as_ref())?;
    emit_outputs(&results, &summary, &config, &set.rejected, &a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;

    for r in &results {
        let excess = r.excess.map_or_else(|| "-".into(), |e| format!("{e:.4}"));
        let active = r.n_active.map_or_else(|| "-".into(), |k| k.to_string());
        println!(
            "{} {}-{} {:<4} {:<6} {:<10} excess {:>8} active {:>3}{}",
            r.window,
            r.start,
            r.end,
            r.criterion,
            r.reference_mode,
            r.status,
            excess,
            active,
            r.error.as_deref().map(|e| format!("  ({e})")).unwrap_or_default()
        );
    }
    let optimal = results.iter().filter(|r| r.is_optimal()).count();
    let uncertified = results.iter().filter(|r| r.certified == Some(false)).count();
    eprintln!("{optimal} of {} cells optimal; outputs in {}", results.len(), a.out.display());
    if uncertified > 0 {
        eprintln!("warning: {uncertified} optimal cells failed certification");
    }
    Ok(if optimal == 0 { 1 } else { 0 })
}
