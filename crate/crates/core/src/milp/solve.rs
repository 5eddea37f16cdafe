//! Solver adapters and solve outcomes.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::model::{Family, MilpModel, VarKind};
use crate::distribution::canonicalize;
use crate::dominance::{check, Criterion, DominanceSpec};
use crate::error::{Error, Result};
use crate::solver::{solve_mip, BnbOptions, MipStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    Error,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub solver: String,
    pub wall_time_secs: f64,
    pub gap: Option<f64>,
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Objective of the returned point in the model's own sense.
    pub objective: Option<f64>,
    /// Portfolio weights `λ`, empty when no point was returned.
    pub weights: Vec<f64>,
    /// Value of every model column, empty when no point was returned.
    pub values: Vec<f64>,
    pub stats: SolveStats,
    pub message: Option<String>,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn values_by_name(&self, model: &MilpModel) -> BTreeMap<String, f64> {
        model
            .variables
            .iter()
            .zip(&self.values)
            .map(|(v, x)| (v.name.clone(), *x))
            .collect()
    }

    /// Builds an outcome from column values, enforcing the contract that an
    /// optimal outcome carries weights in the unit simplex.
    pub(crate) fn from_values(
        model: &MilpModel,
        status: SolveStatus,
        values: Option<Vec<f64>>,
        stats: SolveStats,
    ) -> Result<Self> {
        let (objective, weights, values) = match values {
            Some(v) => {
                let w: Vec<f64> = model.weight_columns().iter().map(|&c| v[c]).collect();
                (Some(model.objective_value(&v)), w, v)
            }
            None => (None, Vec::new(), Vec::new()),
        };
        if status == SolveStatus::Optimal && !weights.is_empty() {
            let sum: f64 = weights.iter().sum();
            if weights.iter().any(|&w| w < -1e-6) || (sum - 1.0).abs() > 1e-6 {
                return Err(Error::SolverFailed(format!("optimal weights leave the simplex (sum {sum})")));
            }
        }
        Ok(Self {
            status,
            objective,
            weights,
            values,
            stats,
            message: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub time: Duration,
    /// Relative MIP gap.
    pub gap: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            time: Duration::from_secs(600),
            gap: 1e-6,
        }
    }
}

/// A MIP solver back end. One blocking call per model.
pub trait SolverAdapter: Send + Sync {
    fn name(&self) -> &str;

    /// Whether calls must be serialized (shared license or process).
    fn serializes_access(&self) -> bool {
        false
    }

    fn solve(&self, model: &MilpModel, limits: &Limits) -> Result<SolveOutcome>;
}

/// Solves `model` with `adapter`.
pub fn solve(model: &MilpModel, adapter: &dyn SolverAdapter, limits: &Limits) -> Result<SolveOutcome> {
    model.validate()?;
    adapter.solve(model, limits)
}

/// In-process branch-and-bound.
#[derive(Debug, Clone)]
pub struct NativeAdapter {
    /// Use the portfolio-structure rounding hint on M1/M2 models.
    pub structural_hint: bool,
    /// Add order-consistency cuts on M1/M2 models: an order flag may be off
    /// only when the pair is not strictly ordered that way.
    pub order_cuts: bool,
    /// Absolute optimality gap, applied alongside the relative one.
    pub abs_gap: f64,
    pub memory_limit: usize,
}

impl Default for NativeAdapter {
    fn default() -> Self {
        Self {
            structural_hint: true,
            order_cuts: true,
            abs_gap: 1e-9,
            memory_limit: 512 << 20,
        }
    }
}

impl SolverAdapter for NativeAdapter {
    fn name(&self) -> &str {
        "native"
    }

    fn solve(&self, model: &MilpModel, limits: &Limits) -> Result<SolveOutcome> {
        let mut mip = model.to_mip();
        let structure = (self.structural_hint || self.order_cuts)
            .then(|| Structure::detect(model))
            .flatten();
        if let (true, Some(s), Some(m)) = (self.order_cuts, &structure, &model.big_m) {
            for (row, hi) in s.order_cuts(m.pairwise) {
                mip.lp.rows.push(row);
                mip.lp.row_lower.push(f64::NEG_INFINITY);
                mip.lp.row_upper.push(hi);
            }
        }
        let hint_fn = structure
            .as_ref()
            .filter(|_| self.structural_hint)
            .map(|s| move |x: &[f64], inc: Option<&[f64]>| s.propose(x, inc));
        let mut opts = BnbOptions {
            time_limit: limits.time,
            rel_gap: limits.gap,
            abs_gap: self.abs_gap,
            memory_limit: self.memory_limit,
            ..BnbOptions::default()
        };
        if let Some(f) = &hint_fn {
            opts.hint = Some(f);
        }
        if let Some(s) = structure.as_ref().filter(|_| self.structural_hint) {
            opts.priority = s.priority(model);
        }
        let result = solve_mip(&mip, &opts);
        let status = match result.status {
            MipStatus::Optimal => SolveStatus::Optimal,
            MipStatus::Infeasible => SolveStatus::Infeasible,
            MipStatus::TimeLimit | MipStatus::NodeLimit => SolveStatus::TimeLimit,
            MipStatus::Unbounded => SolveStatus::Error,
        };
        let gap = result.x.as_ref().map(|_| result.gap());
        let stats = SolveStats {
            solver: self.name().into(),
            wall_time_secs: result.elapsed.as_secs_f64(),
            gap,
            nodes: Some(result.nodes),
        };
        let mut out = SolveOutcome::from_values(model, status, result.x, stats)?;
        if result.status == MipStatus::Unbounded {
            out.message = Some("relaxation is unbounded".into());
        }
        Ok(out)
    }
}

/// Column layout of an M1/M2 model, recovered from names, row families and
/// metadata.
struct Structure {
    lam: Vec<usize>,
    /// `lam_coef[i][j]`: return of asset `j` in state `i`.
    lam_coef: Vec<Vec<f64>>,
    benchmark: Vec<f64>,
    probs: Vec<f64>,
    spec: DominanceSpec,
    xi: Vec<Option<usize>>,
    z: Vec<(usize, usize, usize)>,
    zeta: Vec<(usize, usize, usize)>,
    lattice: Vec<(usize, usize)>,
    steps: usize,
    anchor: OnceLock<Option<Vec<f64>>>,
}

const COARSE_GRID_LIMIT: usize = 5000;

/// Number of points `k / steps` on the `m`-simplex, saturating.
fn grid_size(m: usize, steps: usize) -> usize {
    // C(steps + m - 1, m - 1)
    let mut c: usize = 1;
    for i in 1..m {
        c = c.saturating_mul(steps + i) / i;
        if c > COARSE_GRID_LIMIT * 10 {
            return usize::MAX;
        }
    }
    c
}

fn enumerate_grid(counts: &mut Vec<usize>, j: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
    if j + 1 == counts.len() {
        counts[j] = left;
        f(counts);
        return;
    }
    for k in 0..=left {
        counts[j] = k;
        enumerate_grid(counts, j + 1, left - k, f);
    }
}

/// Points tried on the segment from an incumbent toward the relaxation.
const SEGMENT_STEPS: usize = 12;
const TIE: f64 = 1e-9;

impl Structure {
    fn detect(model: &MilpModel) -> Option<Self> {
        let meta = model.metadata.as_ref()?;
        let n = meta.num_states;
        let lam = model.weight_columns();
        if lam.len() != meta.num_assets || meta.benchmark.len() != n || meta.probs.len() != n {
            return None;
        }
        let lam_pos: BTreeMap<usize, usize> = lam.iter().enumerate().map(|(j, &c)| (c, j)).collect();
        let mut lam_coef = vec![vec![0.0; lam.len()]; n];
        let mut steps = 0;
        for c in &model.constraints {
            match c.family {
                Some(Family::GainUpperShortfall) => {
                    let i: usize = c.name.rsplit('_').next()?.parse().ok()?;
                    for &(col, a) in &c.coeffs {
                        if let Some(&j) = lam_pos.get(&col) {
                            lam_coef[i - 1][j] = a;
                        }
                    }
                }
                Some(Family::Lattice) => {
                    let k = c.coeffs.iter().find(|t| t.1 < 0.0).map_or(0.0, |t| -1.0 / t.1);
                    steps = k.round() as usize;
                }
                _ => {}
            }
        }
        let parse2 = |name: &str, prefix: &str| -> Option<(usize, usize)> {
            let rest = name.strip_prefix(prefix)?;
            let (a, b) = rest.split_once('_')?;
            Some((a.parse::<usize>().ok()? - 1, b.parse::<usize>().ok()? - 1))
        };
        let mut xi = vec![None; n];
        let mut z = Vec::new();
        let mut zeta = Vec::new();
        let mut lattice = Vec::new();
        for (col, v) in model.variables.iter().enumerate() {
            if v.kind == VarKind::Continuous {
                continue;
            }
            if let Some((i, k)) = parse2(&v.name, "z_") {
                z.push((col, i, k));
            } else if let Some((i, k)) = parse2(&v.name, "zeta_") {
                zeta.push((col, i, k));
            } else if let Some(i) = v.name.strip_prefix("xi_").and_then(|s| s.parse::<usize>().ok()) {
                xi[i - 1] = Some(col);
            } else if let Some(j) = v.name.strip_prefix("k_").and_then(|s| s.parse::<usize>().ok()) {
                lattice.push((col, j - 1));
            }
        }
        let spec = match meta.criterion {
            Criterion::Mwsd => DominanceSpec::mwsd(meta.reference, meta.d_minus, meta.d_plus),
            _ => DominanceSpec::msd(meta.reference),
        };
        Some(Self {
            lam,
            lam_coef,
            benchmark: meta.benchmark.clone(),
            probs: meta.probs.clone(),
            spec,
            xi,
            z,
            zeta,
            lattice,
            steps,
            anchor: OnceLock::new(),
        })
    }

    /// Lattice weights first, then gain flags, strict-below flags and
    /// order flags.
    fn priority(&self, model: &MilpModel) -> Vec<i32> {
        let mut p = vec![0; model.num_vars()];
        for &(c, _) in &self.lattice {
            p[c] = 4;
        }
        for c in self.xi.iter().flatten() {
            p[*c] = 3;
        }
        for &(c, _, _) in &self.zeta {
            p[c] = 2;
        }
        for &(c, _, _) in &self.z {
            p[c] = 1;
        }
        p
    }

    /// Valid inequalities tying flags to the portfolio returns they compare:
    /// `x_i - x_k <= M z_ik` and `x_k - y_i <= M (1 - zeta_ik)`. Neither
    /// removes a feasible weight vector; a solution can always set the flag
    /// to the truth value of its comparison.
    fn order_cuts(&self, big_m: f64) -> Vec<(Vec<(usize, f64)>, f64)> {
        let diff = |i: usize, k: usize| -> Vec<(usize, f64)> {
            self.lam
                .iter()
                .enumerate()
                .map(|(j, &c)| (c, self.lam_coef[i][j] - self.lam_coef[k][j]))
                .filter(|t| t.1 != 0.0)
                .collect()
        };
        let mut out = Vec::new();
        for &(c, i, k) in &self.z {
            if i != k {
                let mut row = diff(i, k);
                row.push((c, -big_m));
                out.push((row, 0.0));
            }
        }
        for &(c, i, k) in &self.zeta {
            let mut row: Vec<(usize, f64)> =
                self.lam.iter().enumerate().map(|(j, &col)| (col, self.lam_coef[k][j])).collect();
            row.push((c, big_m));
            out.push((row, self.benchmark[i] + big_m));
        }
        out
    }

    fn weights(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut lambda: Vec<f64> = self.lam.iter().map(|&c| x[c].max(0.0)).collect();
        let total: f64 = lambda.iter().sum();
        if total <= 0.0 {
            return None;
        }
        lambda.iter_mut().for_each(|l| *l /= total);
        Some(self.snap(lambda))
    }

    /// Rounds to the weight lattice when the model has one.
    fn snap(&self, lambda: Vec<f64>) -> Vec<f64> {
        if self.lattice.is_empty() || self.steps == 0 {
            return lambda;
        }
        largest_remainder(&lambda, self.steps)
            .into_iter()
            .map(|k| k as f64 / self.steps as f64)
            .collect()
    }

    fn portfolio(&self, lambda: &[f64]) -> Vec<f64> {
        self.lam_coef
            .iter()
            .map(|row| row.iter().zip(lambda).map(|(a, l)| a * l).sum())
            .collect()
    }

    fn dominates(&self, lambda: &[f64]) -> bool {
        let x = self.portfolio(lambda);
        let Ok(pair) = canonicalize(&x, &self.benchmark, &self.probs) else {
            return false;
        };
        check(&pair, &self.spec).is_ok_and(|v| v.holds)
    }

    /// Integer values implied by `lambda`: each flag is set to the truth
    /// value of the comparison it models.
    fn pattern(&self, lambda: &[f64]) -> Vec<(usize, f64)> {
        let port = self.portfolio(lambda);
        let mut out = Vec::new();
        if !self.lattice.is_empty() {
            for &(c, j) in &self.lattice {
                out.push((c, (lambda[j] * self.steps as f64).round()));
            }
        }
        let r = self.spec.reference;
        for (i, c) in self.xi.iter().enumerate() {
            if let Some(c) = c {
                out.push((*c, f64::from(port[i] > r + TIE)));
            }
        }
        for &(c, i, k) in &self.z {
            out.push((c, f64::from(port[i] > port[k] + TIE)));
        }
        for &(c, i, k) in &self.zeta {
            out.push((c, f64::from(port[k] < self.benchmark[i] - TIE)));
        }
        out
    }

    fn expected(&self, lambda: &[f64]) -> f64 {
        self.portfolio(lambda).iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    /// Best dominating point among the vertices, the centroid and, when the
    /// grid is small, a coarse weight grid. Computed once.
    fn coarse_anchor(&self) -> Option<Vec<f64>> {
        self.anchor
            .get_or_init(|| {
                let m = self.lam.len();
                let mut points: Vec<Vec<f64>> = (0..m)
                    .map(|j| (0..m).map(|k| f64::from(j == k)).collect())
                    .collect();
                points.push(self.snap(vec![1.0 / m as f64; m]));
                let mut steps = 2;
                while steps < 10 && grid_size(m, steps + 1) <= COARSE_GRID_LIMIT {
                    steps += 1;
                }
                if grid_size(m, steps) <= COARSE_GRID_LIMIT {
                    let mut counts = vec![0usize; m];
                    enumerate_grid(&mut counts, 0, steps, &mut |c| {
                        let l: Vec<f64> = c.iter().map(|&k| k as f64 / steps as f64).collect();
                        points.push(self.snap(l));
                    });
                }
                points
                    .into_iter()
                    .filter(|l| self.dominates(l))
                    .map(|l| (self.expected(&l), l))
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, l)| l)
            })
            .clone()
    }

    /// Proposals: the pattern at the relaxation weights, and the pattern at
    /// the dominating point closest to them on the segment from the
    /// incumbent (or from any dominating simplex vertex or the centroid).
    fn propose(&self, x: &[f64], incumbent: Option<&[f64]>) -> Vec<Vec<(usize, f64)>> {
        let Some(target) = self.weights(x) else { return Vec::new() };
        let mut out = vec![self.pattern(&target)];
        if self.dominates(&target) {
            return out;
        }
        let anchors: Vec<Vec<f64>> = match incumbent.and_then(|v| self.weights(v)) {
            Some(w) => vec![w],
            None => self.coarse_anchor().into_iter().collect(),
        };
        for anchor in anchors.into_iter().filter(|a| self.dominates(a)) {
            let found = (1..SEGMENT_STEPS).rev().find_map(|s| {
                let t = s as f64 / SEGMENT_STEPS as f64;
                let lambda: Vec<f64> = anchor.iter().zip(&target).map(|(a, b)| a + t * (b - a)).collect();
                let lambda = self.snap(lambda);
                self.dominates(&lambda).then_some(lambda)
            });
            out.push(self.pattern(found.as_ref().unwrap_or(&anchor)));
        }
        out
    }
}
/// Integer counts summing to `total`, proportional to `weights`.
fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let scaled: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|s| s.floor() as usize).collect();
    let mut rest: Vec<(usize, f64)> = scaled.iter().enumerate().map(|(j, s)| (j, s - s.floor())).collect();
    rest.sort_by(|a, b| b.1.total_cmp(&a.1));
    let assigned: usize = counts.iter().sum();
    for &(j, _) in rest.iter().take(total.saturating_sub(assigned)) {
        counts[j] += 1;
    }
    counts
}
