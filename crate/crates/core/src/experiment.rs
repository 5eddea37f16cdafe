//! Rolling-window study: for each window, criterion and reference mode,
//! build the MILP, solve it, certify the answer and record the metrics.
//!
//! Excess return is in-sample, `E[X*] - E[Y]` over the estimation window,
//! in percent per month.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{augment_reference_state, reference_point, EstimationWindow, ReferenceMode, RejectedWindow, YearMonth};
use crate::dominance::{Criterion, DominanceSpec};
use crate::error::{Error, Result};
use crate::milp::{
    build_m1, build_m2, certify, solve, BuildOptions, Limits, SolveStats, SolveStatus, SolverAdapter, CERTIFY_TOLERANCE,
};

/// Active-weight threshold.
pub const DEFAULT_W_EPS: f64 = 1e-6;
/// Thresholds bracketing `w_eps` for the sensitivity columns.
pub const W_EPS_BAND: (f64, f64) = (1e-8, 1e-4);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub criteria: Vec<Criterion>,
    pub references: Vec<ReferenceMode>,
    pub d_minus: f64,
    pub d_plus: f64,
    pub limits: Limits,
    pub w_eps: f64,
    /// Concurrent solves. Forced to 1 for adapters that serialize access.
    pub jobs: usize,
    pub build: BuildOptions,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            criteria: vec![Criterion::Msd, Criterion::Mwsd],
            references: vec![ReferenceMode::RiskFree, ReferenceMode::Median],
            d_minus: 0.18,
            d_plus: 0.18,
            limits: Limits::default(),
            w_eps: DEFAULT_W_EPS,
            jobs: 1,
            build: BuildOptions::default(),
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.criteria.contains(&Criterion::Fsd) {
            return Err(Error::Data("the study solves MSD and MWSD cells only".into()));
        }
        self.spec(Criterion::Mwsd, 0.0).validate()?;
        if !(self.w_eps > 0.0) {
            return Err(Error::Data(format!("w_eps must be positive, got {}", self.w_eps)));
        }
        Ok(())
    }

    fn spec(&self, criterion: Criterion, r: f64) -> DominanceSpec {
        match criterion {
            Criterion::Mwsd => DominanceSpec::mwsd(r, self.d_minus, self.d_plus),
            _ => DominanceSpec::msd(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub window: usize,
    pub start: YearMonth,
    pub end: YearMonth,
    pub criterion: Criterion,
    pub reference_mode: ReferenceMode,
    pub reference: Option<f64>,
    pub augmented: bool,
    pub num_states: usize,
    pub status: SolveStatus,
    pub weights: Vec<f64>,
    /// `E[X*]`, the portfolio's mean return.
    pub objective: Option<f64>,
    pub benchmark_mean: f64,
    pub excess: Option<f64>,
    pub n_active: Option<usize>,
    /// Active counts at the loose and strict ends of [`W_EPS_BAND`].
    pub n_active_band: Option<(usize, usize)>,
    pub certified: Option<bool>,
    pub stats: Option<SolveStats>,
    pub error: Option<String>,
}

impl WindowResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Aggregates for one (criterion, reference) cell over its optimal windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub criterion: Criterion,
    pub reference_mode: ReferenceMode,
    pub windows: usize,
    pub optimal_windows: usize,
    /// Percent of optimal windows with `λ_j > w_eps`, per asset.
    pub popularity: Vec<f64>,
    pub weight_min: Vec<Option<f64>>,
    pub weight_mean: Vec<Option<f64>>,
    pub weight_max: Vec<Option<f64>>,
    /// `(window, excess)` for every window, `None` when not optimal.
    pub excess: Vec<(usize, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub labels: Vec<String>,
    pub cells: Vec<CellSummary>,
}

/// Runs every window × criterion × reference cell. A failing cell is
/// recorded with status `error` and does not stop the study.
pub fn run_study(
    windows: &[EstimationWindow],
    config: &StudyConfig,
    adapter: &dyn SolverAdapter,
) -> Result<(Vec<WindowResult>, StudySummary)> {
    config.validate()?;
    let cells: Vec<(&EstimationWindow, Criterion, ReferenceMode)> = windows
        .iter()
        .flat_map(|w| {
            config
                .criteria
                .iter()
                .flat_map(move |&c| config.references.iter().map(move |&r| (w, c, r)))
        })
        .collect();
    let jobs = if adapter.serializes_access() { 1 } else { config.jobs.max(1) };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Data(format!("thread pool: {e}")))?;
    let results: Vec<WindowResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(w, c, r)| run_cell(w, c, r, config, adapter))
            .collect()
    });
    let labels = windows
        .first()
        .map(|w| w.panel.labels().to_vec())
        .unwrap_or_default();
    let summary = summarize(&results, &labels, config);
    Ok((results, summary))
}

fn run_cell(
    window: &EstimationWindow,
    criterion: Criterion,
    mode: ReferenceMode,
    config: &StudyConfig,
    adapter: &dyn SolverAdapter,
) -> WindowResult {
    let mut res = WindowResult {
        window: window.id,
        start: window.start,
        end: window.end,
        criterion,
        reference_mode: mode,
        reference: None,
        augmented: false,
        num_states: window.num_states(),
        status: SolveStatus::Error,
        weights: Vec::new(),
        objective: None,
        benchmark_mean: window.benchmark.expected_return(),
        excess: None,
        n_active: None,
        n_active_band: None,
        certified: None,
        stats: None,
        error: None,
    };
    if let Err(e) = solve_cell(window, criterion, mode, config, adapter, &mut res) {
        res.status = SolveStatus::Error;
        res.error = Some(e.to_string());
    }
    res
}

fn solve_cell(
    window: &EstimationWindow,
    criterion: Criterion,
    mode: ReferenceMode,
    config: &StudyConfig,
    adapter: &dyn SolverAdapter,
    res: &mut WindowResult,
) -> Result<()> {
    let r = reference_point(window, mode)?;
    res.reference = Some(r);
    let w = augment_reference_state(window, r)?;
    res.augmented = w.augmented;
    res.num_states = w.num_states();
    let bounds = w.panel.support(&w.benchmark, r)?;
    let model = match criterion {
        Criterion::Mwsd => build_m2(&w.panel, &w.benchmark, r, config.d_minus, config.d_plus, bounds, config.build)?,
        _ => build_m1(&w.panel, &w.benchmark, r, bounds, config.build)?,
    };
    let out = solve(&model, adapter, &config.limits)?;
    res.status = out.status;
    res.stats = Some(out.stats.clone());
    res.error = out.message.clone();
    if !out.weights.is_empty() {
        let mean: f64 = w
            .panel
            .expected_returns()
            .iter()
            .zip(&out.weights)
            .map(|(m, l)| m * l)
            .sum();
        let count = |eps: f64| out.weights.iter().filter(|&&l| l > eps).count();
        res.objective = Some(mean);
        res.excess = Some(mean - res.benchmark_mean);
        res.n_active = Some(count(config.w_eps));
        res.n_active_band = Some((count(W_EPS_BAND.1), count(W_EPS_BAND.0)));
        res.weights = out.weights.clone();
    }
    if out.is_optimal() {
        res.certified = Some(certify(&out, &w.panel, &w.benchmark, &config.spec(criterion, r))?.holds);
    }
    Ok(())
}

/// Per-cell aggregates over optimal windows.
pub fn summarize(results: &[WindowResult], labels: &[String], config: &StudyConfig) -> StudySummary {
    let m = labels.len();
    let mut cells = Vec::new();
    for &criterion in &config.criteria {
        for &mode in &config.references {
            let rows: Vec<&WindowResult> = results
                .iter()
                .filter(|r| r.criterion == criterion && r.reference_mode == mode)
                .collect();
            let optimal: Vec<&WindowResult> = rows
                .iter()
                .copied()
                .filter(|r| r.is_optimal() && r.weights.len() == m)
                .collect();
            let k = optimal.len();
            let column = |j: usize| optimal.iter().map(move |r| r.weights[j]);
            let popularity = (0..m)
                .map(|j| {
                    if k == 0 {
                        0.0
                    } else {
                        100.0 * column(j).filter(|&l| l > config.w_eps).count() as f64 / k as f64
                    }
                })
                .collect();
            let stat = |f: &dyn Fn(usize) -> f64| -> Vec<Option<f64>> {
                (0..m).map(|j| (k > 0).then(|| f(j))).collect()
            };
            cells.push(CellSummary {
                criterion,
                reference_mode: mode,
                windows: rows.len(),
                optimal_windows: k,
                popularity,
                weight_min: stat(&|j| column(j).fold(f64::INFINITY, f64::min)),
                weight_mean: stat(&|j| column(j).sum::<f64>() / k as f64),
                weight_max: stat(&|j| column(j).fold(f64::NEG_INFINITY, f64::max)),
                excess: rows
                    .iter()
                    .map(|r| (r.window, r.excess.filter(|_| r.is_optimal())))
                    .collect(),
            });
        }
    }
    StudySummary {
        labels: labels.to_vec(),
        cells,
    }
}

#[derive(Serialize)]
struct ExcessRow<'a> {
    window: usize,
    start: String,
    end: String,
    criterion: Criterion,
    reference_mode: ReferenceMode,
    reference: Option<f64>,
    status: SolveStatus,
    certified: Option<bool>,
    benchmark_mean: f64,
    portfolio_mean: Option<f64>,
    excess_in_sample: Option<f64>,
    excess_out_of_sample: Option<f64>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct ActiveRow {
    window: usize,
    start: String,
    end: String,
    criterion: Criterion,
    reference_mode: ReferenceMode,
    status: SolveStatus,
    n_active: Option<usize>,
    n_active_at_1e_4: Option<usize>,
    n_active_at_1e_8: Option<usize>,
}

#[derive(Serialize)]
struct PopularityRow<'a> {
    criterion: Criterion,
    reference_mode: ReferenceMode,
    industry: &'a str,
    selected_windows: usize,
    optimal_windows: usize,
    popularity_pct: f64,
}

#[derive(Serialize)]
struct RangeRow<'a> {
    criterion: Criterion,
    reference_mode: ReferenceMode,
    industry: &'a str,
    min: Option<f64>,
    mean: Option<f64>,
    max: Option<f64>,
}

#[derive(Serialize)]
struct HeatRow<'a> {
    window: usize,
    start: String,
    criterion: Criterion,
    reference_mode: ReferenceMode,
    industry: &'a str,
    weight: f64,
}

#[derive(Serialize)]
struct NonOptimal<'a> {
    window: usize,
    criterion: Criterion,
    reference_mode: ReferenceMode,
    status: SolveStatus,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    version: &'static str,
    created: String,
    config: &'a StudyConfig,
    solver: Option<&'a str>,
    tolerances: Tolerances,
    seeds: Vec<u64>,
    windows: usize,
    cells: usize,
    optimal_cells: usize,
    excess_definition: &'static str,
    units: &'static str,
    rejected_windows: &'a [RejectedWindow],
    non_optimal: Vec<NonOptimal<'a>>,
    files: Vec<&'static str>,
}

#[derive(Serialize)]
struct Tolerances {
    w_eps: f64,
    w_eps_band: (f64, f64),
    certify: f64,
    mip_rel_gap: f64,
}

pub const OUTPUT_FILES: [&str; 6] = [
    "excess_by_window.csv",
    "n_active_by_window.csv",
    "popularity.csv",
    "weight_ranges.csv",
    "weights_heatmap.csv",
    "study_manifest.json",
];

fn csv_out<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the study CSVs and `study_manifest.json` into `out_dir`.
pub fn emit_outputs(
    results: &[WindowResult],
    summary: &StudySummary,
    config: &StudyConfig,
    rejected: &[RejectedWindow],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if out_dir.as_os_str().is_empty() {
        return Err(Error::EmptyPath);
    }
    std::fs::create_dir_all(out_dir)?;
    let path = |f: &str| out_dir.join(f);

    csv_out(
        &path(OUTPUT_FILES[0]),
        results.iter().map(|r| ExcessRow {
            window: r.window,
            start: r.start.to_string(),
            end: r.end.to_string(),
            criterion: r.criterion,
            reference_mode: r.reference_mode,
            reference: r.reference,
            status: r.status,
            certified: r.certified,
            benchmark_mean: r.benchmark_mean,
            portfolio_mean: r.objective,
            excess_in_sample: r.excess,
            excess_out_of_sample: None,
            error: r.error.as_deref(),
        }),
    )?;
    csv_out(
        &path(OUTPUT_FILES[1]),
        results.iter().map(|r| ActiveRow {
            window: r.window,
            start: r.start.to_string(),
            end: r.end.to_string(),
            criterion: r.criterion,
            reference_mode: r.reference_mode,
            status: r.status,
            n_active: r.n_active,
            n_active_at_1e_4: r.n_active_band.map(|b| b.0),
            n_active_at_1e_8: r.n_active_band.map(|b| b.1),
        }),
    )?;
    csv_out(
        &path(OUTPUT_FILES[2]),
        summary.cells.iter().flat_map(|c| {
            summary.labels.iter().enumerate().map(move |(j, l)| PopularityRow {
                criterion: c.criterion,
                reference_mode: c.reference_mode,
                industry: l,
                selected_windows: (c.popularity[j] * c.optimal_windows as f64 / 100.0).round() as usize,
                optimal_windows: c.optimal_windows,
                popularity_pct: c.popularity[j],
            })
        }),
    )?;
    csv_out(
        &path(OUTPUT_FILES[3]),
        summary.cells.iter().flat_map(|c| {
            summary.labels.iter().enumerate().map(move |(j, l)| RangeRow {
                criterion: c.criterion,
                reference_mode: c.reference_mode,
                industry: l,
                min: c.weight_min[j],
                mean: c.weight_mean[j],
                max: c.weight_max[j],
            })
        }),
    )?;
    csv_out(
        &path(OUTPUT_FILES[4]),
        results.iter().filter(|r| r.is_optimal()).flat_map(|r| {
            summary.labels.iter().zip(&r.weights).map(move |(l, &weight)| HeatRow {
                window: r.window,
                start: r.start.to_string(),
                criterion: r.criterion,
                reference_mode: r.reference_mode,
                industry: l,
                weight,
            })
        }),
    )?;

    let manifest = Manifest {
        schema: "msd.study.v1",
        version: env!("CARGO_PKG_VERSION"),
        created: chrono::Utc::now().to_rfc3339(),
        config,
        solver: results.iter().find_map(|r| r.stats.as_ref()).map(|s| s.solver.as_str()),
        tolerances: Tolerances {
            w_eps: config.w_eps,
            w_eps_band: W_EPS_BAND,
            certify: CERTIFY_TOLERANCE,
            mip_rel_gap: config.limits.gap,
        },
        seeds: Vec::new(),
        windows: results.iter().map(|r| r.window).collect::<std::collections::BTreeSet<_>>().len(),
        cells: results.len(),
        optimal_cells: results.iter().filter(|r| r.is_optimal()).count(),
        excess_definition: "in-sample E[X*] - E[Y] over the estimation window",
        units: "percent per month",
        rejected_windows: rejected,
        non_optimal: results
            .iter()
            .filter(|r| !r.is_optimal())
            .map(|r| NonOptimal {
                window: r.window,
                criterion: r.criterion,
                reference_mode: r.reference_mode,
                status: r.status,
                error: r.error.as_deref(),
            })
            .collect(),
        files: OUTPUT_FILES.to_vec(),
    };
    std::fs::write(path(OUTPUT_FILES[5]), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(OUTPUT_FILES.iter().map(|f| path(f)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::NativeAdapter;

    fn window(assets: Vec<Vec<f64>>, y: Vec<f64>, rf: f64) -> EstimationWindow {
        let n = y.len();
        let labels = (1..=assets.len()).map(|j| format!("A{j}")).collect();
        EstimationWindow::from_months(0, YearMonth::new(2000, 1).unwrap(), assets, labels, y, vec![rf; n]).unwrap()
    }

    #[test]
    fn benchmark_only_panel_has_zero_excess() {
        let y = vec![-1.0, 0.5, 2.0, 0.25];
        let w = window(vec![y.clone()], y, 0.1);
        let (res, summary) = run_study(&[w], &StudyConfig::default(), &NativeAdapter::default()).unwrap();
        assert_eq!(res.len(), 4);
        for r in &res {
            assert!(r.is_optimal(), "{r:?}");
            assert!(r.excess.unwrap().abs() < 1e-9);
            assert_eq!(r.n_active, Some(1));
            assert_eq!(r.certified, Some(true));
        }
        assert!(res.iter().any(|r| r.augmented));
        assert_eq!(summary.cells.len(), 4);
        assert_eq!(summary.cells[0].popularity, vec![100.0]);
    }

    #[test]
    fn fsd_dominating_asset_gives_positive_excess() {
        let y = vec![-1.0, 0.0, 1.0, 2.0];
        let better: Vec<f64> = y.iter().map(|v| v + 0.5).collect();
        let w = window(vec![y.clone(), better], y, 0.2);
        let config = StudyConfig {
            jobs: 2,
            ..StudyConfig::default()
        };
        let (res, summary) = run_study(&[w], &config, &NativeAdapter::default()).unwrap();
        for r in &res {
            assert!(r.is_optimal());
            assert!(r.excess.unwrap() > 0.0);
            assert!(r.n_active.unwrap() >= 1);
        }
        let m1 = &res[0];
        let m2 = &res[2];
        assert!(m1.excess.unwrap() >= m2.excess.unwrap() - 1e-6);
        let cell = &summary.cells[0];
        assert!(cell.weight_min[1].unwrap() <= cell.weight_mean[1].unwrap());
        assert!(cell.weight_mean[1].unwrap() <= cell.weight_max[1].unwrap());
    }

    #[test]
    fn failing_cells_are_recorded() {
        let y = vec![-1.0, 0.5, 2.0];
        let mut w = window(vec![y.clone()], y, 0.0);
        w.riskfree.clear();
        let (res, summary) = run_study(&[w], &StudyConfig::default(), &NativeAdapter::default()).unwrap();
        let rf: Vec<&WindowResult> = res.iter().filter(|r| r.reference_mode == ReferenceMode::RiskFree).collect();
        assert!(rf.iter().all(|r| r.status == SolveStatus::Error && r.error.is_some()));
        let cell = summary.cells.iter().find(|c| c.reference_mode == ReferenceMode::RiskFree).unwrap();
        assert_eq!(cell.optimal_windows, 0);
        assert_eq!(cell.popularity, vec![0.0]);
        assert_eq!(cell.weight_min, vec![None]);
    }

    #[test]
    fn outputs() {
        let y = vec![-1.0, 0.0, 1.0, 2.0];
        let w = window(vec![y.clone(), y.iter().map(|v| v * 0.5).collect()], y, 0.2);
        let config = StudyConfig::default();
        let (res, summary) = run_study(&[w], &config, &NativeAdapter::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_outputs(&res, &summary, &config, &[], dir.path()).unwrap();
        assert_eq!(files.len(), 6);
        let excess = std::fs::read_to_string(dir.path().join("excess_by_window.csv")).unwrap();
        assert_eq!(excess.lines().count(), 5);
        assert!(excess.starts_with("window,start,end,criterion,reference_mode,reference,status"));
        let pop = std::fs::read_to_string(dir.path().join("popularity.csv")).unwrap();
        assert_eq!(pop.lines().count(), 1 + 4 * 2);

        let strip = |s: String| -> String { s.lines().filter(|l| !l.contains("\"created\"")).collect() };
        let first = strip(std::fs::read_to_string(dir.path().join("study_manifest.json")).unwrap());
        emit_outputs(&res, &summary, &config, &[], dir.path()).unwrap();
        let second = strip(std::fs::read_to_string(dir.path().join("study_manifest.json")).unwrap());
        assert_eq!(first, second);
        assert!(emit_outputs(&res, &summary, &config, &[], Path::new("")).is_err());
    }
}
