//! Depth-first branch-and-bound over [`Simplex`] relaxations.

use std::time::{Duration, Instant};

use super::lp::{LpProblem, LpStatus, Simplex};

/// An LP with integrality requirements on some columns.
#[derive(Debug, Clone)]
pub struct MipProblem {
    pub lp: LpProblem,
    pub integer: Vec<bool>,
}

/// Proposes integer assignments from a relaxation point and the current
/// incumbent. The solver fixes each proposal, re-solves the LP and keeps the
/// result if feasible, then asks again from the improved point.
pub type RoundingHint<'a> = &'a (dyn Fn(&[f64], Option<&[f64]>) -> Vec<Vec<(usize, f64)>> + Sync);

/// Rounds of re-proposing from an improved point.
const POLISH_ROUNDS: usize = 4;

#[derive(Clone)]
pub struct BnbOptions<'a> {
    pub time_limit: Duration,
    pub rel_gap: f64,
    pub abs_gap: f64,
    pub int_tol: f64,
    pub node_limit: Option<usize>,
    /// Cap on memory held by stored tableaux; beyond it nodes keep only
    /// their basis and are refactored when popped.
    pub memory_limit: usize,
    /// Branching priority per column (higher first); empty means uniform.
    pub priority: Vec<i32>,
    pub hint: Option<RoundingHint<'a>>,
    /// Run the hint every this many nodes (and always at the root).
    pub hint_every: usize,
}

impl Default for BnbOptions<'_> {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(600),
            rel_gap: 1e-6,
            abs_gap: 1e-9,
            int_tol: 1e-6,
            node_limit: None,
            memory_limit: 512 << 20,
            priority: Vec::new(),
            hint: None,
            hint_every: 16,
        }
    }
}

impl std::fmt::Debug for BnbOptions<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BnbOptions")
            .field("time_limit", &self.time_limit)
            .field("rel_gap", &self.rel_gap)
            .field("abs_gap", &self.abs_gap)
            .field("node_limit", &self.node_limit)
            .field("hint", &self.hint.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
}

#[derive(Debug, Clone)]
pub struct MipResult {
    pub status: MipStatus,
    /// Best integer feasible point found, if any.
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    /// Lower bound on the optimum (minimization).
    pub bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub elapsed: Duration,
}

impl MipResult {
    pub fn gap(&self) -> f64 {
        if self.x.is_none() {
            return f64::INFINITY;
        }
        (self.objective - self.bound).max(0.0) / self.objective.abs().max(1.0)
    }
}

enum Warm {
    Tableau(Box<Simplex>),
    Basis(Vec<usize>, Vec<bool>),
}

struct Node {
    /// Bounds of the integer columns, indexed like `MipProblem::integer`.
    bounds: Vec<(f64, f64)>,
    parent_bound: f64,
    warm: Warm,
}

struct Search<'p, 'o> {
    problem: &'p MipProblem,
    opts: &'o BnbOptions<'o>,
    int_cols: Vec<usize>,
    incumbent: Option<(Vec<f64>, f64)>,
    lp_limit: usize,
    /// Integer columns with more than two values.
    general: Vec<bool>,
}

impl Search<'_, '_> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((_, obj)) => obj - self.opts.abs_gap.max(self.opts.rel_gap * obj.abs()),
            None => f64::INFINITY,
        }
    }

    fn apply_bounds(&self, s: &mut Simplex, bounds: &[(f64, f64)]) {
        for (k, &j) in self.int_cols.iter().enumerate() {
            if s.col_bounds(j) != bounds[k] {
                s.set_col_bounds(j, bounds[k].0, bounds[k].1);
            }
        }
    }

    /// Records `x` if it is feasible and improves the incumbent. Returns
    /// whether `x` is feasible.
    fn offer(&mut self, x: Vec<f64>) -> bool {
        let lp = &self.problem.lp;
        if lp.max_violation(&x) > 1e-6 {
            return false;
        }
        if self
            .int_cols
            .iter()
            .any(|&j| (x[j] - x[j].round()).abs() > self.opts.int_tol)
        {
            return false;
        }
        let obj = lp.objective(&x);
        if self.incumbent.as_ref().is_none_or(|(_, best)| obj < *best) {
            self.incumbent = Some((x, obj));
        }
        true
    }

    /// Runs the hint from `x` and polishes every proposal that solves.
    fn run_hint(&mut self, hint: RoundingHint<'_>, s: &Simplex, x: &[f64], iterations: &mut usize) {
        let incumbent = self.incumbent.as_ref().map(|(v, _)| v.clone());
        for values in hint(x, incumbent.as_deref()) {
            let mut point = self.fix_and_solve(s, &values, iterations);
            for _ in 0..POLISH_ROUNDS {
                let Some((px, pobj)) = point else { break };
                let Some(next) = hint(&px, Some(&px)).into_iter().next() else { break };
                point = self
                    .fix_and_solve(s, &next, iterations)
                    .filter(|(_, obj)| *obj < pobj - 1e-12);
            }
        }
    }

    /// Fixes the integer columns to `values` and re-solves the LP. Returns
    /// the point and objective when it was accepted as an incumbent
    /// candidate.
    fn fix_and_solve(
        &mut self,
        s: &Simplex,
        values: &[(usize, f64)],
        iterations: &mut usize,
    ) -> Option<(Vec<f64>, f64)> {
        let mut trial = s.clone();
        for &(j, v) in values {
            let (lo, hi) = (self.problem.lp.col_lower[j], self.problem.lp.col_upper[j]);
            let v = v.round().clamp(lo, hi);
            trial.set_col_bounds(j, v, v);
        }
        let before = trial.iterations;
        let status = trial.solve(self.lp_limit);
        *iterations += trial.iterations - before;
        if status != LpStatus::Optimal {
            return None;
        }
        let mut x = trial.primal().to_vec();
        for &(j, _) in values {
            x[j] = x[j].round();
        }
        let obj = self.problem.lp.objective(&x);
        self.offer(x.clone()).then_some((x, obj))
    }

    /// Branching column and split point: children get `x <= split` and
    /// `x >= split + 1`. The flag says whether to dive into the down child.
    ///
    /// Most fractional within the highest priority. A general integer of
    /// strictly higher priority whose domain is still open is bisected even
    /// when integral.
    fn pick_branch(&self, x: &[f64], bounds: &[(f64, f64)]) -> Option<(usize, f64, bool)> {
        let prio = |j: usize| self.opts.priority.get(j).copied().unwrap_or(0);
        let mut best: Option<(usize, i32, f64)> = None;
        for &j in &self.int_cols {
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist <= self.opts.int_tol {
                continue;
            }
            let p = prio(j);
            let better = match best {
                None => true,
                Some((_, bp, bd)) => p > bp || (p == bp && dist > bd + 1e-12),
            };
            if better {
                best = Some((j, p, dist));
            }
        }
        let (j, p, _) = best?;
        let open = self
            .int_cols
            .iter()
            .enumerate()
            .filter(|&(k, &c)| {
                let (lo, hi) = bounds[k];
                self.general[k] && hi > lo && prio(c) > p
            })
            .max_by_key(|&(_, &c)| prio(c));
        if let Some((k, &c)) = open {
            let (lo, hi) = bounds[k];
            let split = ((lo + hi) / 2.0).floor();
            return Some((c, split, x[c] < split + 0.5));
        }
        let v = x[j];
        Some((j, v.floor(), v - v.floor() < 0.5))
    }
}

/// Minimizes `problem` by depth-first branch-and-bound, diving into the
/// child on the side the relaxation value rounds to.
pub fn solve_mip(problem: &MipProblem, opts: &BnbOptions<'_>) -> MipResult {
    let start = Instant::now();
    let int_cols: Vec<usize> = (0..problem.lp.num_cols())
        .filter(|&j| problem.integer[j])
        .collect();
    let general: Vec<bool> = int_cols
        .iter()
        .map(|&j| problem.lp.col_upper[j] - problem.lp.col_lower[j] > 1.0)
        .collect();
    let lp_limit = 100 * (problem.lp.num_rows() + problem.lp.num_cols()) + 10_000;
    let mut search = Search {
        problem,
        opts,
        int_cols,
        incumbent: None,
        lp_limit,
        general,
    };
    let root_bounds: Vec<(f64, f64)> = search
        .int_cols
        .iter()
        .map(|&j| {
            let (lo, hi) = (problem.lp.col_lower[j], problem.lp.col_upper[j]);
            (lo.ceil(), hi.floor())
        })
        .collect();

    let mut simplex = Simplex::new(&problem.lp);
    let mut stack: Vec<Node> = Vec::new();
    let mut stored_bytes = 0usize;
    let mut current: Option<(Vec<(f64, f64)>, f64)> = Some((root_bounds, f64::NEG_INFINITY));
    let mut nodes = 0usize;
    let mut iterations = 0usize;
    let mut stopped: Option<MipStatus> = None;
    let mut incomplete = false;

    loop {
        if start.elapsed() >= opts.time_limit {
            stopped = Some(MipStatus::TimeLimit);
        } else if opts.node_limit.is_some_and(|l| nodes >= l) {
            stopped = Some(MipStatus::NodeLimit);
        }
        if stopped.is_some() {
            if let Some((b, pb)) = current.take() {
                stack.push(Node {
                    bounds: b,
                    parent_bound: pb,
                    warm: Warm::Basis(Vec::new(), Vec::new()),
                });
            }
            break;
        }

        let (bounds, parent_bound) = match current.take() {
            Some(c) => c,
            None => match stack.pop() {
                None => break,
                Some(node) => {
                    if node.parent_bound >= search.cutoff() {
                        if let Warm::Tableau(t) = &node.warm {
                            stored_bytes -= t.footprint();
                        }
                        continue;
                    }
                    match node.warm {
                        Warm::Tableau(t) => {
                            stored_bytes -= t.footprint();
                            simplex = *t;
                            search.apply_bounds(&mut simplex, &node.bounds);
                        }
                        Warm::Basis(basis, at_upper) => {
                            search.apply_bounds(&mut simplex, &node.bounds);
                            simplex.load_basis(&basis, &at_upper);
                        }
                    }
                    (node.bounds, node.parent_bound)
                }
            },
        };
        if parent_bound >= search.cutoff() {
            continue;
        }
        search.apply_bounds(&mut simplex, &bounds);
        nodes += 1;
        let before = simplex.iterations;
        let mut status = simplex.solve(lp_limit);
        if status == LpStatus::IterationLimit {
            simplex = Simplex::new(&problem.lp);
            search.apply_bounds(&mut simplex, &bounds);
            status = simplex.solve(lp_limit);
        }
        iterations += simplex.iterations.saturating_sub(before);
        match status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if nodes == 1 {
                    return MipResult {
                        status: MipStatus::Unbounded,
                        x: None,
                        objective: f64::NEG_INFINITY,
                        bound: f64::NEG_INFINITY,
                        nodes,
                        lp_iterations: iterations,
                        elapsed: start.elapsed(),
                    };
                }
                incomplete = true;
                continue;
            }
            LpStatus::IterationLimit => {
                incomplete = true;
                continue;
            }
            LpStatus::Optimal => {}
        }
        let obj = simplex.objective();
        if obj >= search.cutoff() {
            continue;
        }
        let x = simplex.primal().to_vec();
        let Some((j, split, dive_down)) = search.pick_branch(&x, &bounds) else {
            let values: Vec<(usize, f64)> = search.int_cols.iter().map(|&j| (j, x[j])).collect();
            search.fix_and_solve(&simplex, &values, &mut iterations);
            continue;
        };
        if let Some(hint) = opts.hint {
            if nodes == 1 || nodes % opts.hint_every.max(1) == 0 {
                search.run_hint(hint, &simplex, &x, &mut iterations);
                if obj >= search.cutoff() {
                    continue;
                }
            }
        }

        let k = search.int_cols.iter().position(|&c| c == j).expect("integer column");
        let mut down = bounds.clone();
        down[k].1 = split;
        let mut up = bounds;
        up[k].0 = split + 1.0;
        let (near, far) = if dive_down { (down, up) } else { (up, down) };
        let warm = if stored_bytes + simplex.footprint() <= opts.memory_limit {
            stored_bytes += simplex.footprint();
            Warm::Tableau(Box::new(simplex.clone()))
        } else {
            let (b, u) = simplex.basis_snapshot();
            Warm::Basis(b, u)
        };
        stack.push(Node {
            bounds: far,
            parent_bound: obj,
            warm,
        });
        current = Some((near, obj));
    }

    let open_bound = stack
        .iter()
        .map(|n| n.parent_bound)
        .fold(f64::INFINITY, f64::min);
    let (x, objective) = match search.incumbent {
        Some((x, obj)) => (Some(x), obj),
        None => (None, f64::INFINITY),
    };
    let status = match stopped {
        Some(s) => s,
        None if x.is_some() => MipStatus::Optimal,
        None => MipStatus::Infeasible,
    };
    let bound = if stopped.is_some() || incomplete {
        open_bound.min(objective)
    } else {
        objective
    };
    MipResult {
        status,
        x,
        objective,
        bound,
        nodes,
        lp_iterations: iterations,
        elapsed: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const INF: f64 = f64::INFINITY;

    fn knapsack(values: &[f64], weights: &[f64], cap: f64) -> MipProblem {
        let n = values.len();
        MipProblem {
            lp: LpProblem {
                col_lower: vec![0.0; n],
                col_upper: vec![1.0; n],
                cost: values.iter().map(|v| -v).collect(),
                rows: vec![weights.iter().copied().enumerate().collect()],
                row_lower: vec![-INF],
                row_upper: vec![cap],
            },
            integer: vec![true; n],
        }
    }

    fn brute(values: &[f64], weights: &[f64], cap: f64) -> f64 {
        let n = values.len();
        (0..1u32 << n)
            .filter_map(|mask| {
                let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
                (w <= cap + 1e-9).then(|| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).sum::<f64>())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn knapsacks_match_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(3..12);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..10.0f64).round()).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..10.0f64).round()).collect();
            let cap = (w.iter().sum::<f64>() * 0.4).round();
            let r = solve_mip(&knapsack(&v, &w, cap), &BnbOptions::default());
            assert_eq!(r.status, MipStatus::Optimal);
            assert_abs_diff_eq!(-r.objective, brute(&v, &w, cap), epsilon = 1e-6);
        }
    }

    #[test]
    fn general_integers() {
        // max x + y st 2x + 2y <= 7, x - y <= 0.5, x,y integer in [0,10]
        let p = MipProblem {
            lp: LpProblem {
                col_lower: vec![0.0, 0.0],
                col_upper: vec![10.0, 10.0],
                cost: vec![-1.0, -1.0],
                rows: vec![vec![(0, 2.0), (1, 2.0)], vec![(0, 1.0), (1, -1.0)]],
                row_lower: vec![-INF, -INF],
                row_upper: vec![7.0, 0.5],
            },
            integer: vec![true, true],
        };
        let r = solve_mip(&p, &BnbOptions::default());
        assert_eq!(r.status, MipStatus::Optimal);
        assert_abs_diff_eq!(r.objective, -3.0, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_integer_program() {
        // 2x = 1 with x integer.
        let p = MipProblem {
            lp: LpProblem {
                col_lower: vec![0.0],
                col_upper: vec![5.0],
                cost: vec![1.0],
                rows: vec![vec![(0, 2.0)]],
                row_lower: vec![1.0],
                row_upper: vec![1.0],
            },
            integer: vec![true],
        };
        assert_eq!(solve_mip(&p, &BnbOptions::default()).status, MipStatus::Infeasible);
    }

    #[test]
    fn tableau_memory_cap_falls_back_to_basis() {
        let v = [5.0, 4.0, 3.0, 7.0, 2.0, 6.0, 3.0, 8.0];
        let w = [4.0, 3.0, 2.0, 5.0, 1.0, 4.0, 2.0, 6.0];
        let opts = BnbOptions {
            memory_limit: 0,
            ..BnbOptions::default()
        };
        let r = solve_mip(&knapsack(&v, &w, 12.0), &opts);
        assert_abs_diff_eq!(-r.objective, brute(&v, &w, 12.0), epsilon = 1e-6);
    }
}
