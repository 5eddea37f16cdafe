//! Dense-tableau bounded-variable simplex.
//!
//! Rows are turned into equalities `a·x - s = 0` with a bounded slack `s`, so
//! the initial slack basis is always available. Solves run the dual simplex
//! on slightly perturbed costs and then a primal simplex on the true costs
//! to remove any dual infeasibility left by the perturbation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimize `cost·x` subject to `row_lower <= A x <= row_upper` and
/// `col_lower <= x <= col_upper`.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
}

impl LpProblem {
    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Largest violation of row or column bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.col_lower[j] - v).max(v - self.col_upper[j]);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let act: f64 = row.iter().map(|&(j, a)| a * x[j]).sum();
            worst = worst.max(self.row_lower[i] - act).max(act - self.row_upper[i]);
        }
        worst
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
/// Stand-in bound for variables whose cost would push them to infinity.
const ARTIFICIAL_BOUND: f64 = 1e7;
const REFRESH_EVERY: usize = 64;
const STALL_LIMIT: usize = 60;

fn primal_tol(bound: f64) -> f64 {
    PRIMAL_TOL * (1.0 + bound.abs())
}

/// Simplex state: tableau `B⁻¹ [A | -I]`, basis and values of all columns
/// (structural columns first, then one slack per row).
#[derive(Debug, Clone)]
pub struct Simplex {
    m: usize,
    n: usize,
    w: usize,
    tab: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Whether the lower / upper bound of a column is an artificial box.
    artificial: Vec<(bool, bool)>,
    value: Vec<f64>,
    at_upper: Vec<bool>,
    cost: Vec<f64>,
    true_cost: Vec<f64>,
    dj: Vec<f64>,
    rows: std::rc::Rc<Vec<Vec<(usize, f64)>>>,
    rng: ChaCha8Rng,
    pub iterations: usize,
}

const NONBASIC: usize = usize::MAX;

impl Simplex {
    pub fn new(problem: &LpProblem) -> Self {
        let m = problem.num_rows();
        let n = problem.num_cols();
        let w = n + m;
        let mut tab = vec![0.0; m * w];
        for (i, row) in problem.rows.iter().enumerate() {
            for &(j, a) in row {
                tab[i * w + j] -= a;
            }
            tab[i * w + n + i] = 1.0;
        }
        let mut lower = problem.col_lower.clone();
        lower.extend(&problem.row_lower);
        let mut upper = problem.col_upper.clone();
        upper.extend(&problem.row_upper);
        let mut true_cost = problem.cost.clone();
        true_cost.resize(w, 0.0);

        let mut s = Self {
            m,
            n,
            w,
            tab,
            basis: (n..w).collect(),
            row_of: (0..w).map(|j| if j >= n { j - n } else { NONBASIC }).collect(),
            lower,
            upper,
            artificial: vec![(false, false); w],
            value: vec![0.0; w],
            at_upper: vec![false; w],
            cost: true_cost.clone(),
            true_cost,
            dj: vec![0.0; w],
            rows: std::rc::Rc::new(problem.rows.clone()),
            rng: ChaCha8Rng::seed_from_u64(0x5eed),
            iterations: 0,
        };
        for j in 0..n {
            s.place_nonbasic(j);
        }
        s.recompute_duals();
        s.recompute_primal();
        s
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    /// Current values of the structural columns.
    pub fn primal(&self) -> &[f64] {
        &self.value[..self.n]
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.true_cost[j] * self.value[j]).sum()
    }

    pub fn col_bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Memory held by the tableau, in bytes.
    pub fn footprint(&self) -> usize {
        self.tab.len() * std::mem::size_of::<f64>()
    }

    /// Picks a bound for nonbasic column `j` that keeps its reduced cost dual
    /// feasible where possible, boxing it artificially if that bound is
    /// infinite.
    fn place_nonbasic(&mut self, j: usize) {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        let c = self.true_cost[j];
        let want_upper = c < 0.0 || lo == f64::NEG_INFINITY;
        if want_upper {
            if hi.is_finite() {
                self.at_upper[j] = true;
                self.value[j] = hi;
            } else if lo.is_finite() && c >= 0.0 {
                self.at_upper[j] = false;
                self.value[j] = lo;
            } else {
                self.upper[j] = lo.max(0.0) + ARTIFICIAL_BOUND;
                self.artificial[j].1 = true;
                self.at_upper[j] = true;
                self.value[j] = self.upper[j];
                if !lo.is_finite() {
                    self.lower[j] = -ARTIFICIAL_BOUND;
                    self.artificial[j].0 = true;
                }
            }
        } else {
            self.at_upper[j] = false;
            self.value[j] = lo;
        }
    }

    /// Changes the bounds of structural column `j`. Nonbasic columns stay on
    /// the same side, so dual feasibility is preserved.
    pub fn set_col_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
        self.artificial[j] = (false, false);
        if self.row_of[j] == NONBASIC {
            let side_upper = if lo == hi { self.at_upper[j] } else { self.at_upper[j] && hi.is_finite() };
            if side_upper && hi.is_finite() {
                self.value[j] = hi;
                self.at_upper[j] = true;
            } else if lo.is_finite() {
                self.value[j] = lo;
                self.at_upper[j] = false;
            } else {
                self.place_nonbasic(j);
            }
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.tab[i * self.w..(i + 1) * self.w]
    }

    fn recompute_duals(&mut self) {
        let mut d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * self.w..(i + 1) * self.w];
                for (dk, a) in d.iter_mut().zip(row) {
                    *dk -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        self.dj = d;
    }

    fn recompute_primal(&mut self) {
        let nz: Vec<(usize, f64)> = (0..self.w)
            .filter(|&j| self.row_of[j] == NONBASIC && self.value[j] != 0.0)
            .map(|j| (j, self.value[j]))
            .collect();
        for i in 0..self.m {
            let row = self.row(i);
            let s: f64 = nz.iter().map(|&(j, v)| row[j] * v).sum();
            let b = self.basis[i];
            self.value[b] = -s;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.w;
        let inv = 1.0 / self.tab[r * w + q];
        let mut nz = Vec::new();
        for k in 0..w {
            let v = &mut self.tab[r * w + k];
            if *v != 0.0 {
                *v *= inv;
                if v.abs() < DROP_TOL {
                    *v = 0.0;
                } else {
                    nz.push((k, *v));
                }
            }
        }
        self.tab[r * w + q] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * w + q];
            if f != 0.0 {
                let row = &mut self.tab[i * w..(i + 1) * w];
                for &(k, v) in &nz {
                    row[k] -= f * v;
                }
                row[q] = 0.0;
            }
        }
        let f = self.dj[q];
        if f != 0.0 {
            for &(k, v) in &nz {
                self.dj[k] -= f * v;
            }
        }
        self.dj[q] = 0.0;
        let leaving = self.basis[r];
        self.row_of[leaving] = NONBASIC;
        self.row_of[q] = r;
        self.basis[r] = q;
        self.iterations += 1;
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.value[j];
        if v < self.lower[j] - primal_tol(self.lower[j]) {
            self.lower[j] - v
        } else if v > self.upper[j] + primal_tol(self.upper[j]) {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    /// Shifts the cost of every nonbasic column away from zero reduced cost
    /// in its dual feasible direction. Basic costs are untouched, so only the
    /// perturbed column's own reduced cost moves.
    fn perturb_costs(&mut self) {
        self.cost.clone_from(&self.true_cost);
        for j in 0..self.w {
            if self.row_of[j] != NONBASIC || self.lower[j] == self.upper[j] {
                continue;
            }
            if self.lower[j] == f64::NEG_INFINITY && self.upper[j] == f64::INFINITY {
                continue;
            }
            let eps = 1e-7 * (1.0 + self.true_cost[j].abs()) * (1.0 + self.rng.gen::<f64>());
            self.cost[j] += if self.at_upper[j] { -eps } else { eps };
        }
        self.recompute_duals();
    }

    fn restore_costs(&mut self) {
        self.cost.clone_from(&self.true_cost);
        self.recompute_duals();
    }

    fn dual_slack(&self, j: usize) -> Option<f64> {
        if self.lower[j] == self.upper[j] {
            return None;
        }
        let free = self.lower[j] == f64::NEG_INFINITY && self.upper[j] == f64::INFINITY;
        Some(if free {
            -self.dj[j].abs()
        } else if self.at_upper[j] {
            -self.dj[j]
        } else {
            self.dj[j]
        })
    }

    /// Restores dual feasibility by moving nonbasic columns to the bound
    /// their reduced cost prefers, boxing them artificially when that bound
    /// is infinite.
    fn flip_to_dual_feasible(&mut self) {
        for j in 0..self.w {
            if self.row_of[j] != NONBASIC {
                continue;
            }
            let Some(s) = self.dual_slack(j) else { continue };
            if s >= -DUAL_TOL {
                continue;
            }
            let free = self.lower[j] == f64::NEG_INFINITY && self.upper[j] == f64::INFINITY;
            let to_upper = if free { self.dj[j] < 0.0 } else { !self.at_upper[j] };
            if to_upper && !self.upper[j].is_finite() {
                self.upper[j] = self.value[j] + ARTIFICIAL_BOUND;
                self.artificial[j].1 = true;
            }
            if !to_upper && !self.lower[j].is_finite() {
                self.lower[j] = self.value[j] - ARTIFICIAL_BOUND;
                self.artificial[j].0 = true;
            }
            self.at_upper[j] = to_upper;
            self.value[j] = if to_upper { self.upper[j] } else { self.lower[j] };
        }
    }

    /// Solves from the current basis.
    pub fn solve(&mut self, max_iterations: usize) -> LpStatus {
        let budget = self.iterations + max_iterations;
        let mut status = LpStatus::Optimal;
        for _attempt in 0..3 {
            self.perturb_costs();
            self.flip_to_dual_feasible();
            self.recompute_primal();
            status = self.dual(budget);
            if status == LpStatus::Optimal {
                self.restore_costs();
                status = self.primal_simplex(budget);
            } else {
                self.restore_costs();
            }
            if status != LpStatus::Optimal || self.verify() {
                break;
            }
            self.refactor();
        }
        if status == LpStatus::Optimal && self.at_artificial_bound() {
            status = LpStatus::Unbounded;
        }
        status
    }

    fn at_artificial_bound(&self) -> bool {
        (0..self.w).any(|j| {
            let (lo, hi) = self.artificial[j];
            (hi && (self.value[j] - self.upper[j]).abs() < 1.0) || (lo && (self.value[j] - self.lower[j]).abs() < 1.0)
        })
    }

    /// Row activities computed from the original matrix agree with the slacks,
    /// and every column is within bounds.
    fn verify(&mut self) -> bool {
        self.recompute_primal();
        for (i, row) in self.rows.iter().enumerate() {
            let act: f64 = row.iter().map(|&(j, a)| a * self.value[j]).sum();
            if (act - self.value[self.n + i]).abs() > 1e-7 * (1.0 + act.abs()) {
                return false;
            }
        }
        (0..self.w).all(|j| self.infeasibility(j) <= 1e-7)
    }

    fn dual(&mut self, budget: usize) -> LpStatus {
        let mut since_refresh = 0;
        let mut stalled = 0;
        let mut last_obj = f64::NEG_INFINITY;
        loop {
            if self.iterations >= budget {
                return LpStatus::IterationLimit;
            }
            if since_refresh >= REFRESH_EVERY {
                self.recompute_primal();
                since_refresh = 0;
            }
            let bland = stalled > STALL_LIMIT;
            // Leaving row.
            let mut r = NONBASIC;
            let mut best = 0.0;
            for i in 0..self.m {
                let inf = self.infeasibility(self.basis[i]);
                if inf > 0.0 {
                    if bland {
                        if r == NONBASIC || self.basis[i] < self.basis[r] {
                            r = i;
                        }
                    } else if inf > best {
                        best = inf;
                        r = i;
                    }
                }
            }
            if r == NONBASIC {
                self.recompute_primal();
                if (0..self.m).all(|i| self.infeasibility(self.basis[i]) == 0.0) {
                    return LpStatus::Optimal;
                }
                continue;
            }
            let leaving = self.basis[r];
            let to_lower = self.value[leaving] < self.lower[leaving];
            let target = if to_lower { self.lower[leaving] } else { self.upper[leaving] };
            let dir = if to_lower { 1.0 } else { -1.0 };

            let Some(q) = self.dual_ratio(r, dir, bland) else {
                return LpStatus::Infeasible;
            };
            let alpha = self.tab[r * self.w + q];
            let t = (self.value[leaving] - target) / alpha;
            for i in 0..self.m {
                let a = self.tab[i * self.w + q];
                if a != 0.0 {
                    let b = self.basis[i];
                    self.value[b] -= a * t;
                }
            }
            self.value[q] += t;
            self.pivot(r, q);
            self.value[leaving] = target;
            self.at_upper[leaving] = !to_lower;
            since_refresh += 1;

            let obj: f64 = (0..self.w).map(|j| self.cost[j] * self.value[j]).sum();
            if obj > last_obj + 1e-12 * (1.0 + obj.abs()) {
                stalled = 0;
                last_obj = obj;
            } else {
                stalled += 1;
            }
        }
    }

    /// Entering column for the dual ratio test on row `r` (Harris two-pass,
    /// or smallest index among the tightest ratios when `bland` is set).
    fn dual_ratio(&self, r: usize, dir: f64, bland: bool) -> Option<usize> {
        let row = self.row(r);
        let mut cands = Vec::new();
        let mut theta_max = f64::INFINITY;
        for j in 0..self.w {
            if self.row_of[j] != NONBASIC {
                continue;
            }
            let a = row[j];
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let Some(slack) = self.dual_slack(j) else { continue };
            let free = self.lower[j] == f64::NEG_INFINITY && self.upper[j] == f64::INFINITY;
            // Moving j in its feasible direction must push the leaving
            // variable toward the violated bound.
            let eligible = free || if self.at_upper[j] { a * dir > 0.0 } else { a * dir < 0.0 };
            if !eligible {
                continue;
            }
            let slack = slack.max(0.0);
            theta_max = theta_max.min((slack + DUAL_TOL) / a.abs());
            cands.push((j, slack / a.abs(), a.abs()));
        }
        if cands.is_empty() {
            return None;
        }
        if bland {
            let min = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            return cands.iter().filter(|c| c.1 <= min + 1e-12).map(|c| c.0).min();
        }
        cands
            .iter()
            .filter(|c| c.1 <= theta_max)
            .max_by(|x, y| x.2.total_cmp(&y.2))
            .map(|c| c.0)
    }

    fn primal_simplex(&mut self, budget: usize) -> LpStatus {
        let mut stalled = 0;
        let mut last_obj = f64::INFINITY;
        let mut since_refresh = 0;
        loop {
            if self.iterations >= budget {
                return LpStatus::IterationLimit;
            }
            if since_refresh >= REFRESH_EVERY {
                self.recompute_primal();
                self.recompute_duals();
                since_refresh = 0;
            }
            let bland = stalled > STALL_LIMIT;
            let mut q = NONBASIC;
            let mut best = 0.0;
            for j in 0..self.w {
                if self.row_of[j] != NONBASIC {
                    continue;
                }
                if let Some(s) = self.dual_slack(j) {
                    if s < -DUAL_TOL {
                        if bland {
                            q = j;
                            break;
                        }
                        if -s > best {
                            best = -s;
                            q = j;
                        }
                    }
                }
            }
            if q == NONBASIC {
                return LpStatus::Optimal;
            }
            let free = self.lower[q] == f64::NEG_INFINITY && self.upper[q] == f64::INFINITY;
            let sigma = if free {
                -self.dj[q].signum()
            } else if self.at_upper[q] {
                -1.0
            } else {
                1.0
            };

            // Ratio test over basic variables plus the entering bound flip.
            let mut theta_max = f64::INFINITY;
            let mut rows = Vec::new();
            for i in 0..self.m {
                let a = self.tab[i * self.w + q];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let rate = -a * sigma;
                let (room, tol) = if rate < 0.0 {
                    (self.value[b] - self.lower[b], primal_tol(self.lower[b]))
                } else {
                    (self.upper[b] - self.value[b], primal_tol(self.upper[b]))
                };
                if !room.is_finite() {
                    continue;
                }
                theta_max = theta_max.min((room.max(0.0) + tol) / a.abs());
                rows.push((i, room.max(0.0) / a.abs(), a.abs()));
            }
            let flip = self.upper[q] - self.lower[q];
            let chosen = if bland {
                let min = rows.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
                rows.iter()
                    .filter(|c| c.1 <= min + 1e-12)
                    .min_by_key(|c| self.basis[c.0])
                    .copied()
            } else {
                rows.iter()
                    .filter(|c| c.1 <= theta_max)
                    .max_by(|x, y| x.2.total_cmp(&y.2))
                    .copied()
            };
            match chosen {
                Some((_, ratio, _)) if ratio < flip => {
                    let (r, t, _) = chosen.unwrap();
                    let leaving = self.basis[r];
                    let step = sigma * t;
                    for i in 0..self.m {
                        let a = self.tab[i * self.w + q];
                        if a != 0.0 {
                            let b = self.basis[i];
                            self.value[b] -= a * step;
                        }
                    }
                    self.value[q] += step;
                    let a = self.tab[r * self.w + q];
                    let goes_lower = -a * sigma < 0.0;
                    self.pivot(r, q);
                    self.at_upper[leaving] = !goes_lower;
                    self.value[leaving] = if goes_lower { self.lower[leaving] } else { self.upper[leaving] };
                }
                _ if flip.is_finite() => {
                    let step = sigma * flip;
                    for i in 0..self.m {
                        let a = self.tab[i * self.w + q];
                        if a != 0.0 {
                            let b = self.basis[i];
                            self.value[b] -= a * step;
                        }
                    }
                    self.at_upper[q] = sigma > 0.0;
                    self.value[q] = if self.at_upper[q] { self.upper[q] } else { self.lower[q] };
                    self.iterations += 1;
                }
                _ => return LpStatus::Unbounded,
            }
            since_refresh += 1;
            let obj: f64 = (0..self.w).map(|j| self.cost[j] * self.value[j]).sum();
            if obj < last_obj - 1e-12 * (1.0 + obj.abs()) {
                stalled = 0;
                last_obj = obj;
            } else {
                stalled += 1;
            }
        }
    }

    /// Basis heads and the at-upper flag of every column.
    pub fn basis_snapshot(&self) -> (Vec<usize>, Vec<bool>) {
        (self.basis.clone(), self.at_upper.clone())
    }

    /// Rebuilds the tableau for `basis` starting from the slack basis.
    pub fn load_basis(&mut self, basis: &[usize], at_upper: &[bool]) {
        self.reset_tableau();
        let target: std::collections::HashSet<usize> = basis.iter().copied().collect();
        for &j in basis {
            if self.row_of[j] != NONBASIC {
                continue;
            }
            let mut best = (NONBASIC, 1e-7);
            for i in 0..self.m {
                if target.contains(&self.basis[i]) {
                    continue;
                }
                let a = self.tab[i * self.w + j].abs();
                if a > best.1 {
                    best = (i, a);
                }
            }
            if best.0 != NONBASIC {
                self.pivot(best.0, j);
            }
        }
        for j in 0..self.w {
            if self.row_of[j] == NONBASIC {
                self.at_upper[j] = at_upper[j] && self.upper[j].is_finite() || !self.lower[j].is_finite();
                self.value[j] = if self.at_upper[j] { self.upper[j] } else { self.lower[j] };
                if !self.value[j].is_finite() {
                    self.value[j] = 0.0;
                }
            }
        }
        self.recompute_duals();
        self.recompute_primal();
    }

    fn reset_tableau(&mut self) {
        let (m, n, w) = (self.m, self.n, self.w);
        self.tab.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                self.tab[i * w + j] -= a;
            }
            self.tab[i * w + n + i] = 1.0;
        }
        self.basis = (n..w).collect();
        self.row_of = (0..w).map(|j| if j >= n { j - n } else { NONBASIC }).collect();
        let _ = m;
    }

    /// Rebuilds the tableau for the current basis to shed accumulated error.
    pub fn refactor(&mut self) {
        let (basis, at_upper) = self.basis_snapshot();
        self.load_basis(&basis, &at_upper);
    }
}

/// Solves `problem` from scratch.
pub fn solve_lp(problem: &LpProblem) -> (LpStatus, Vec<f64>, f64) {
    let mut s = Simplex::new(problem);
    let limit = 100 * (problem.num_rows() + problem.num_cols()) + 10_000;
    let status = s.solve(limit);
    let x = s.primal().to_vec();
    let obj = problem.objective(&x);
    (status, x, obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lp(cost: &[f64], rows: &[(&[(usize, f64)], f64, f64)], lo: &[f64], hi: &[f64]) -> LpProblem {
        LpProblem {
            col_lower: lo.to_vec(),
            col_upper: hi.to_vec(),
            cost: cost.to_vec(),
            rows: rows.iter().map(|r| r.0.to_vec()).collect(),
            row_lower: rows.iter().map(|r| r.1).collect(),
            row_upper: rows.iter().map(|r| r.2).collect(),
        }
    }

    const INF: f64 = f64::INFINITY;

    #[test]
    fn textbook_max() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18
        let p = lp(
            &[-3.0, -5.0],
            &[(&[(0, 1.0)], -INF, 4.0), (&[(1, 2.0)], -INF, 12.0), (&[(0, 3.0), (1, 2.0)], -INF, 18.0)],
            &[0.0, 0.0],
            &[INF, INF],
        );
        let (st, x, obj) = solve_lp(&p);
        assert_eq!(st, LpStatus::Optimal);
        assert_abs_diff_eq!(obj, -36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y + 3z st x + y + z = 1, y + z >= 0.5, z <= 0.2
        let p = lp(
            &[1.0, 2.0, 3.0],
            &[(&[(0, 1.0), (1, 1.0), (2, 1.0)], 1.0, 1.0), (&[(1, 1.0), (2, 1.0)], 0.5, INF)],
            &[0.0; 3],
            &[INF, INF, 0.2],
        );
        let (st, x, obj) = solve_lp(&p);
        assert_eq!(st, LpStatus::Optimal);
        assert_abs_diff_eq!(obj, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(&[1.0], &[(&[(0, 1.0)], 2.0, INF), (&[(0, 1.0)], -INF, 1.0)], &[0.0], &[INF]);
        assert_eq!(solve_lp(&p).0, LpStatus::Infeasible);
        let p = lp(&[-1.0, 0.0], &[(&[(0, 1.0), (1, -1.0)], -INF, 1.0)], &[0.0, 0.0], &[INF, INF]);
        assert_eq!(solve_lp(&p).0, LpStatus::Unbounded);
    }

    #[test]
    fn warm_bound_change() {
        let p = lp(
            &[-1.0, -1.0],
            &[(&[(0, 1.0), (1, 2.0)], -INF, 4.0), (&[(0, 3.0), (1, 1.0)], -INF, 6.0)],
            &[0.0, 0.0],
            &[INF, INF],
        );
        let mut s = Simplex::new(&p);
        assert_eq!(s.solve(1000), LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective(), -2.8, epsilon = 1e-9);
        s.set_col_bounds(0, 0.0, 1.0);
        assert_eq!(s.solve(1000), LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective(), -2.5, epsilon = 1e-9);
        s.set_col_bounds(0, 2.0, INF);
        assert_eq!(s.solve(1000), LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective(), -2.0 - 0.0, epsilon = 1e-9);
        let (b, u) = s.basis_snapshot();
        let mut t = Simplex::new(&p);
        t.set_col_bounds(0, 2.0, INF);
        t.load_basis(&b, &u);
        assert_eq!(t.solve(1000), LpStatus::Optimal);
        assert_abs_diff_eq!(t.objective(), s.objective(), epsilon = 1e-9);
    }

    /// Minimum over all vertices of a bounded LP: every choice of `n` tight
    /// hyperplanes among rows and bounds, solved by Gaussian elimination.
    fn vertex_min(p: &LpProblem) -> Option<f64> {
        let n = p.num_cols();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for (row, (&lo, &hi)) in p.rows.iter().zip(p.row_lower.iter().zip(&p.row_upper)) {
            let mut a = vec![0.0; n];
            for &(j, c) in row {
                a[j] += c;
            }
            for b in [lo, hi].into_iter().filter(|b| b.is_finite()) {
                planes.push((a.clone(), b));
            }
        }
        for j in 0..n {
            let e: Vec<f64> = (0..n).map(|k| f64::from(j == k)).collect();
            planes.push((e.clone(), p.col_lower[j]));
            planes.push((e, p.col_upper[j]));
        }
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        fn next(pick: &mut [usize], total: usize) -> bool {
            let n = pick.len();
            for i in (0..n).rev() {
                if pick[i] < total - (n - i) {
                    pick[i] += 1;
                    for k in i + 1..n {
                        pick[k] = pick[k - 1] + 1;
                    }
                    return true;
                }
            }
            false
        }
        for (i, v) in pick.iter_mut().enumerate() {
            *v = i;
        }
        loop {
            let mut m: Vec<Vec<f64>> = pick
                .iter()
                .map(|&k| {
                    let mut r = planes[k].0.clone();
                    r.push(planes[k].1);
                    r
                })
                .collect();
            let mut ok = true;
            for c in 0..n {
                let piv = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
                if m[piv][c].abs() < 1e-9 {
                    ok = false;
                    break;
                }
                m.swap(c, piv);
                for r in 0..n {
                    if r != c {
                        let f = m[r][c] / m[c][c];
                        for k in c..=n {
                            m[r][k] -= f * m[c][k];
                        }
                    }
                }
            }
            if ok {
                let x: Vec<f64> = (0..n).map(|c| m[c][n] / m[c][c]).collect();
                if p.max_violation(&x) <= 1e-7 {
                    let v = p.objective(&x);
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            if !next(&mut pick, planes.len()) {
                break;
            }
        }
        best
    }

    fn small_lp() -> impl Strategy<Value = LpProblem> {
        (2usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
            let coef = || -4i32..=4;
            (
                proptest::collection::vec(coef(), n),
                proptest::collection::vec((proptest::collection::vec(coef(), n), -6i32..=6, 0u8..3), m),
                proptest::collection::vec((-3i32..=0, 1i32..=4), n),
            )
                .prop_map(move |(cost, rows, bounds)| LpProblem {
                    col_lower: bounds.iter().map(|b| f64::from(b.0)).collect(),
                    col_upper: bounds.iter().map(|b| f64::from(b.1)).collect(),
                    cost: cost.iter().map(|&c| f64::from(c)).collect(),
                    rows: rows
                        .iter()
                        .map(|r| r.0.iter().enumerate().map(|(j, &c)| (j, f64::from(c))).collect())
                        .collect(),
                    row_lower: rows
                        .iter()
                        .map(|r| if r.2 == 1 { f64::NEG_INFINITY } else { f64::from(r.1) })
                        .collect(),
                    row_upper: rows
                        .iter()
                        .map(|r| match r.2 {
                            0 => f64::INFINITY,
                            1 => f64::from(r.1),
                            _ => f64::from(r.1) + 2.0,
                        })
                        .collect(),
                })
        })
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn matches_vertex_enumeration(p in small_lp()) {
            let (st, x, obj) = solve_lp(&p);
            match vertex_min(&p) {
                Some(best) => {
                    prop_assert_eq!(st, LpStatus::Optimal);
                    prop_assert!(p.max_violation(&x) <= 1e-7);
                    prop_assert!((obj - best).abs() <= 1e-7, "simplex {} vs vertices {}", obj, best);
                }
                None => prop_assert_eq!(st, LpStatus::Infeasible),
            }
        }
    }
}
