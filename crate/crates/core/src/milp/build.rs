//! M1 (MSD) and M2 (MWSD) model builders.

use serde::{Deserialize, Serialize};

use super::model::{BigMValues, Family, MilpModel, ModelMetadata, Sense, VarKind};
use crate::distribution::{validate_probs, DiscreteReturnDistribution, SupportBounds, EPS};
use crate::dominance::{conditional_fsd_bound, Criterion};
use crate::error::{Error, Result};

/// Returns of `m` base assets over `n` shared states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetPanel {
    /// `returns[j][i]` is the return of asset `j` in state `i`.
    returns: Vec<Vec<f64>>,
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl AssetPanel {
    pub fn new(returns: Vec<Vec<f64>>, labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if returns.is_empty() {
            return Err(Error::InvalidReturns("panel needs at least one asset".into()));
        }
        if labels.len() != returns.len() {
            return Err(Error::LengthMismatch {
                what: "asset labels and assets",
                left: labels.len(),
                right: returns.len(),
            });
        }
        validate_probs(&probs)?;
        for (j, row) in returns.iter().enumerate() {
            if row.len() != probs.len() {
                return Err(Error::LengthMismatch {
                    what: "asset returns and states",
                    left: row.len(),
                    right: probs.len(),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidReturns(format!("asset {} has non-finite return {v}", labels[j])));
            }
        }
        Ok(Self { returns, labels, probs })
    }

    /// Equal-probability panel with labels `A1, A2, ...`.
    pub fn uniform(returns: Vec<Vec<f64>>) -> Result<Self> {
        let n = returns.first().map_or(0, Vec::len);
        let labels = (1..=returns.len()).map(|j| format!("A{j}")).collect();
        Self::new(returns, labels, crate::distribution::uniform_probs(n))
    }

    pub fn num_assets(&self) -> usize {
        self.returns.len()
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn asset(&self, j: usize) -> &[f64] {
        &self.returns[j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// State returns of the portfolio with weights `lambda`.
    pub fn portfolio(&self, lambda: &[f64]) -> Vec<f64> {
        (0..self.num_states())
            .map(|i| lambda.iter().zip(&self.returns).map(|(l, r)| l * r[i]).sum())
            .collect()
    }

    pub fn expected_returns(&self) -> Vec<f64> {
        self.returns
            .iter()
            .map(|r| r.iter().zip(&self.probs).map(|(x, p)| x * p).sum())
            .collect()
    }

    /// Same panel with states reordered by `perm` (`perm[k]` is the old index).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            returns: self.returns.iter().map(|r| perm.iter().map(|&i| r[i]).collect()).collect(),
            labels: self.labels.clone(),
            probs: perm.iter().map(|&i| self.probs[i]).collect(),
        }
    }

    /// Interval covering every asset return, the benchmark and `r`.
    pub fn support(&self, benchmark: &DiscreteReturnDistribution, reference: f64) -> Result<SupportBounds> {
        SupportBounds::enclosing(
            self.returns
                .iter()
                .flatten()
                .chain(benchmark.returns())
                .copied()
                .chain(std::iter::once(reference)),
        )
    }
}

/// Optional additions to the published formulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Add the upper-tail comparison at the reference point (η family).
    /// Without it the model admits portfolios that fail MSD at `t = r`.
    pub reference_gain: bool,
    /// Multiplier applied to every derived big-M constant.
    pub big_m_scale: f64,
    /// Restrict weights to multiples of `1 / steps` via integer columns.
    pub lattice_steps: Option<u32>,
    /// Conditional FSD rows follow the side of `r` each benchmark interval
    /// lies on. Matches `DominanceSpec::split_at_reference`.
    pub split_at_reference: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            reference_gain: true,
            big_m_scale: 1.0,
            lattice_steps: None,
            split_at_reference: true,
        }
    }
}

impl BuildOptions {
    /// Exactly the published families, nothing added.
    pub fn literal() -> Self {
        Self {
            reference_gain: false,
            split_at_reference: false,
            ..Self::default()
        }
    }
}

struct Builder<'a> {
    panel: &'a AssetPanel,
    benchmark: &'a DiscreteReturnDistribution,
    r: f64,
    bounds: SupportBounds,
    big_m: BigMValues,
    model: MilpModel,
    lam: Vec<usize>,
}

impl Builder<'_> {
    /// Terms of `x_i = Σ_j λ_j x_{j,i}` scaled by `scale`.
    fn x(&self, i: usize, scale: f64) -> Vec<(usize, f64)> {
        self.lam
            .iter()
            .enumerate()
            .map(|(j, &col)| (col, scale * self.panel.returns[j][i]))
            .collect()
    }
}

fn check_inputs(panel: &AssetPanel, benchmark: &DiscreteReturnDistribution, r: f64) -> Result<()> {
    if benchmark.len() != panel.num_states() {
        return Err(Error::LengthMismatch {
            what: "benchmark and panel states",
            left: benchmark.len(),
            right: panel.num_states(),
        });
    }
    if benchmark
        .probs()
        .iter()
        .zip(panel.probs())
        .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::InvalidProbabilities("benchmark and panel probabilities differ".into()));
    }
    if benchmark.returns().windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::BenchmarkNotSorted);
    }
    if !benchmark.returns().iter().any(|y| (y - r).abs() <= EPS) {
        return Err(Error::ReferenceNotOnGrid(r));
    }
    Ok(())
}

/// Expected-return maximization under MSD constraints against `benchmark`.
///
/// `benchmark` must be sorted ascending with `r` among its returns and share
/// the panel's state probabilities; `bounds` must cover every asset return.
pub fn build_m1(
    panel: &AssetPanel,
    benchmark: &DiscreteReturnDistribution,
    r: f64,
    bounds: SupportBounds,
    options: BuildOptions,
) -> Result<MilpModel> {
    let mut b = msd_rows(panel, benchmark, r, bounds, options, "msd_m1")?;
    b.model.metadata.as_mut().expect("set by msd_rows").criterion = Criterion::Msd;
    finish(b, options)
}

/// M1 plus the conditional first-order rows of MWSD with thresholds
/// `d_minus`, `d_plus`.
pub fn build_m2(
    panel: &AssetPanel,
    benchmark: &DiscreteReturnDistribution,
    r: f64,
    d_minus: f64,
    d_plus: f64,
    bounds: SupportBounds,
    options: BuildOptions,
) -> Result<MilpModel> {
    for (name, value) in [("d_minus", d_minus), ("d_plus", d_plus)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidThreshold { name, value });
        }
    }
    let mut b = msd_rows(panel, benchmark, r, bounds, options, "mwsd_m2")?;
    {
        let meta = b.model.metadata.as_mut().expect("set by msd_rows");
        meta.criterion = Criterion::Mwsd;
        meta.d_minus = d_minus;
        meta.d_plus = d_plus;
    }
    let n = panel.num_states();
    let y = benchmark.returns();
    let p = panel.probs();
    let m_pair = b.big_m.pairwise;

    let mut zeta = vec![vec![0usize; n]; n];
    for (i, row) in zeta.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = b.model.add_var(format!("zeta_{}_{}", i + 1, k + 1), VarKind::Binary, 0.0, Some(1.0));
        }
    }
    for i in 0..n {
        for k in 0..n {
            let mut t = b.x(k, 1.0);
            t.push((zeta[i][k], m_pair));
            b.model
                .add_constraint(format!("strict_below_{}_{}", i + 1, k + 1), Some(Family::StrictBelow), t, Sense::Ge, y[i]);
        }
    }
    for i in 0..n {
        let lagged = if i == 0 { 0.0 } else { benchmark.cdf(y[i - 1]) };
        if let Some(rhs) = conditional_fsd_bound(y[i], lagged, r, d_minus, d_plus, options.split_at_reference) {
            let t = (0..n).map(|k| (zeta[i][k], p[k])).collect();
            b.model.add_constraint(format!("cond_fsd_{}", i + 1), Some(Family::ConditionalFsd), t, Sense::Le, rhs);
        }
    }
    finish(b, options)
}

fn msd_rows<'a>(
    panel: &'a AssetPanel,
    benchmark: &'a DiscreteReturnDistribution,
    r: f64,
    bounds: SupportBounds,
    options: BuildOptions,
    name: &str,
) -> Result<Builder<'a>> {
    check_inputs(panel, benchmark, r)?;
    let lo = panel.returns.iter().flatten().chain(benchmark.returns()).copied().fold(f64::INFINITY, f64::min);
    let hi = panel.returns.iter().flatten().chain(benchmark.returns()).copied().fold(f64::NEG_INFINITY, f64::max);
    if lo < bounds.a - EPS || hi > bounds.b + EPS || r < bounds.a || r > bounds.b {
        return Err(Error::OutsideDomain {
            value: if lo < bounds.a { lo } else { hi },
            a: bounds.a,
            b: bounds.b,
        });
    }
    let big_m = BigMValues::derive(bounds, r)?.scaled(options.big_m_scale);
    let n = panel.num_states();
    let m = panel.num_assets();
    let p = panel.probs().to_vec();
    let y = benchmark.returns().to_vec();
    let f2_y_b = benchmark.integrated_cdf(bounds.b);
    let loss_states: Vec<usize> = (0..n).filter(|&i| y[i] <= r + EPS).collect();

    let mut model = MilpModel::new(name, true);
    model.big_m = Some(big_m);
    model.metadata = Some(ModelMetadata {
        criterion: Criterion::Msd,
        reference: r,
        d_minus: 1.0,
        d_plus: 1.0,
        f2_y_b,
        loss_states: loss_states.clone(),
        num_assets: m,
        num_states: n,
        bounds: (bounds.a, bounds.b),
        benchmark: y.clone(),
        probs: p.clone(),
    });

    let lam: Vec<usize> = (0..m)
        .map(|j| model.add_var(format!("lam_{}", j + 1), VarKind::Continuous, 0.0, Some(1.0)))
        .collect();
    let grid = |model: &mut MilpModel, prefix: &str, kind: VarKind, rows: usize| -> Vec<Vec<usize>> {
        (0..rows)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let upper = (kind == VarKind::Binary).then_some(1.0);
                        model.add_var(format!("{prefix}_{}_{}", i + 1, k + 1), kind, 0.0, upper)
                    })
                    .collect()
            })
            .collect()
    };
    let phi = grid(&mut model, "phi", VarKind::Continuous, n);
    let psi: Vec<usize> = (0..n)
        .map(|k| model.add_var(format!("psi_{}", k + 1), VarKind::Continuous, 0.0, None))
        .collect();
    let theta = grid(&mut model, "theta", VarKind::Continuous, n);
    let z = grid(&mut model, "z", VarKind::Binary, n);
    let xi: Vec<usize> = (0..n)
        .map(|i| model.add_var(format!("xi_{}", i + 1), VarKind::Binary, 0.0, Some(1.0)))
        .collect();
    let delta: Vec<Vec<usize>> = loss_states
        .iter()
        .map(|&i| {
            (0..n)
                .map(|k| model.add_var(format!("delta_{}_{}", i + 1, k + 1), VarKind::Continuous, 0.0, None))
                .collect()
        })
        .collect();

    let mut b = Builder {
        panel,
        benchmark,
        r,
        bounds,
        big_m,
        model,
        lam,
    };
    let objective: Vec<(usize, f64)> = {
        let means = panel.expected_returns();
        b.lam.iter().zip(means).map(|(&c, mu)| (c, mu)).collect()
    };
    b.model.objective = objective;

    for i in 0..n {
        for k in 0..n {
            let mut t = b.x(i, 1.0);
            t.push((phi[i][k], -1.0));
            b.model.add_constraint(
                format!("gain_bench_{}_{}", i + 1, k + 1),
                Some(Family::GainBenchmarkShortfall),
                t,
                Sense::Le,
                y[k],
            );
        }
    }
    for k in 0..n {
        let mut t = b.x(k, 1.0);
        t.push((psi[k], 1.0));
        b.model
            .add_constraint(format!("gain_upper_{}", k + 1), Some(Family::GainUpperShortfall), t, Sense::Ge, bounds.b);
    }
    let mp = big_m.pairwise;
    for i in 0..n {
        for k in 0..n {
            let mut t = b.x(i, 1.0);
            t.extend(b.x(k, -1.0));
            t.push((z[i][k], -mp));
            t.push((theta[i][k], -1.0));
            b.model
                .add_constraint(format!("order_link_{}_{}", i + 1, k + 1), Some(Family::GainOrderLink), t, Sense::Ge, -mp);
        }
    }
    for i in 0..n {
        for k in 0..n {
            b.model.add_constraint(
                format!("order_gate_{}_{}", i + 1, k + 1),
                Some(Family::GainOrderGate),
                vec![(z[i][k], mp), (theta[i][k], -1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }
    for i in 0..n {
        let mut t = b.x(i, 1.0);
        t.push((xi[i], -big_m.indicator));
        b.model
            .add_constraint(format!("gain_flag_{}", i + 1), Some(Family::GainIndicator), t, Sense::Le, r);
    }
    for i in 0..n {
        let mut t: Vec<(usize, f64)> = Vec::with_capacity(3 * n + 1);
        t.extend((0..n).map(|k| (phi[i][k], p[k])));
        t.extend((0..n).map(|k| (psi[k], p[k])));
        t.extend((0..n).map(|k| (theta[i][k], -p[k])));
        t.push((xi[i], big_m.aggregate));
        b.model.add_constraint(
            format!("gain_sum_{}", i + 1),
            Some(Family::GainAggregate),
            t,
            Sense::Le,
            f2_y_b + big_m.aggregate,
        );
    }
    for (row, &i) in loss_states.iter().enumerate() {
        for k in 0..n {
            let mut t = b.x(k, 1.0);
            t.push((delta[row][k], 1.0));
            b.model.add_constraint(
                format!("loss_{}_{}", i + 1, k + 1),
                Some(Family::LossShortfall),
                t,
                Sense::Ge,
                y[i],
            );
        }
    }
    for (row, &i) in loss_states.iter().enumerate() {
        let t = (0..n).map(|k| (delta[row][k], p[k])).collect();
        b.model.add_constraint(
            format!("loss_sum_{}", i + 1),
            Some(Family::LossAggregate),
            t,
            Sense::Le,
            benchmark.integrated_cdf(y[i]),
        );
    }
    let budget = b.lam.iter().map(|&c| (c, 1.0)).collect();
    b.model.add_constraint("budget", Some(Family::Budget), budget, Sense::Eq, 1.0);

    if options.reference_gain {
        let eta: Vec<usize> = (0..n)
            .map(|k| b.model.add_var(format!("eta_{}", k + 1), VarKind::Continuous, 0.0, None))
            .collect();
        for k in 0..n {
            let mut t = b.x(k, -1.0);
            t.push((eta[k], 1.0));
            t.push((xi[k], mp));
            b.model.add_constraint(
                format!("ref_link_{}", k + 1),
                Some(Family::ReferenceGainLink),
                t,
                Sense::Le,
                mp - r,
            );
        }
        for k in 0..n {
            b.model.add_constraint(
                format!("ref_gate_{}", k + 1),
                Some(Family::ReferenceGainGate),
                vec![(eta[k], 1.0), (xi[k], -big_m.indicator)],
                Sense::Le,
                0.0,
            );
        }
        let t = (0..n).map(|k| (eta[k], p[k])).collect();
        b.model.add_constraint(
            "ref_sum",
            Some(Family::ReferenceGainAggregate),
            t,
            Sense::Ge,
            benchmark.upper_partial_moment(r),
        );
    }
    Ok(b)
}

fn finish(mut b: Builder<'_>, options: BuildOptions) -> Result<MilpModel> {
    if let Some(steps) = options.lattice_steps {
        if steps == 0 {
            return Err(Error::InvalidModel("lattice needs at least one step".into()));
        }
        let lam = b.lam.clone();
        for (j, &col) in lam.iter().enumerate() {
            let k = b.model.add_var(format!("k_{}", j + 1), VarKind::Integer, 0.0, Some(steps as f64));
            b.model.add_constraint(
                format!("lattice_{}", j + 1),
                Some(Family::Lattice),
                vec![(col, 1.0), (k, -1.0 / steps as f64)],
                Sense::Eq,
                0.0,
            );
        }
    }
    let _ = (b.benchmark, b.r, b.bounds);
    b.model.validate()?;
    Ok(b.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (AssetPanel, DiscreteReturnDistribution) {
        let panel = AssetPanel::uniform(vec![vec![0.0, 1.0, 3.0], vec![-1.0, 1.0, 1.0]]).unwrap();
        let y = DiscreteReturnDistribution::uniform(vec![-1.0, 0.0, 2.0]).unwrap();
        (panel, y)
    }

    #[test]
    fn m1_counts() {
        let (panel, y) = toy();
        let bounds = panel.support(&y, 0.0).unwrap();
        let model = build_m1(&panel, &y, 0.0, bounds, BuildOptions::literal()).unwrap();
        let (n, m, nl) = (3, 2, 2);
        assert_eq!(model.num_vars(), m + n * n + n + n * n + n * n + n + nl * n);
        assert_eq!(model.num_vars(), 2 + 9 + 3 + 9 + 9 + 3 + 2 * 3);
        assert_eq!(model.num_constraints(), 3 * n * n + 3 * n + nl * n + nl + 1);
        let fam = model.rows_by_family();
        assert_eq!(fam[&Family::GainOrderLink], n * n);
        assert_eq!(fam[&Family::LossShortfall], nl * n);
        assert!(fam.keys().all(|f| f.is_literal()));
        assert_eq!(model.count_kind(VarKind::Binary), n * n + n);
    }

    #[test]
    fn reference_gain_adds_rows_not_binaries() {
        let (panel, y) = toy();
        let bounds = panel.support(&y, 0.0).unwrap();
        let lit = build_m1(&panel, &y, 0.0, bounds, BuildOptions::literal()).unwrap();
        let full = build_m1(&panel, &y, 0.0, bounds, BuildOptions::default()).unwrap();
        assert_eq!(full.num_vars(), lit.num_vars() + 3);
        assert_eq!(full.num_constraints(), lit.num_constraints() + 2 * 3 + 1);
        assert_eq!(full.count_kind(VarKind::Binary), lit.count_kind(VarKind::Binary));
    }

    #[test]
    fn m2_counts_and_gates() {
        let (panel, y) = toy();
        let bounds = panel.support(&y, 0.0).unwrap();
        let m2 = build_m2(&panel, &y, 0.0, 1.0, 1.0, bounds, BuildOptions::literal()).unwrap();
        let fam = m2.rows_by_family();
        assert_eq!(fam[&Family::StrictBelow], 9);
        assert!(!fam.contains_key(&Family::ConditionalFsd));
        assert_eq!(m2.count_kind(VarKind::Binary), 2 * 9 + 3);

        // F_Y(y_0) = 0, F_Y(y_1) = 1/3, F_Y(y_2) = 2/3: with d⁺ = 0.5 only
        // the first two states satisfy F_Y(y_{i-1}) < 1 - d⁺.
        let m2 = build_m2(&panel, &y, 0.0, 0.18, 0.5, bounds, BuildOptions::literal()).unwrap();
        assert_eq!(m2.rows_by_family()[&Family::ConditionalFsd], 2);
        let rhs: Vec<f64> = m2
            .constraints
            .iter()
            .filter(|c| c.family == Some(Family::ConditionalFsd))
            .map(|c| c.rhs)
            .collect();
        assert_eq!(rhs, vec![0.18, 1.0 / 3.0]);
    }

    #[test]
    fn m2_rows_follow_the_reference_side() {
        let (panel, y) = toy();
        let bounds = panel.support(&y, 0.0).unwrap();
        let rhs = |d_minus, d_plus, options| {
            let m2 = build_m2(&panel, &y, 0.0, d_minus, d_plus, bounds, options).unwrap();
            m2.constraints
                .iter()
                .filter(|c| c.family == Some(Family::ConditionalFsd))
                .map(|c| c.rhs)
                .collect::<Vec<f64>>()
        };
        // y = 2 lies above r: no d⁻ relaxation there.
        assert_eq!(rhs(0.7, 0.18, BuildOptions::literal()), vec![0.7; 3]);
        assert_eq!(rhs(0.7, 0.18, BuildOptions::default()), vec![0.7, 0.7, 2.0 / 3.0]);
        // y = 0 is a loss state: the d⁺ cutoff does not exempt it.
        assert_eq!(rhs(0.7, 0.9, BuildOptions::literal()), vec![0.7]);
        assert_eq!(rhs(0.7, 0.9, BuildOptions::default()), vec![0.7, 0.7]);
    }

    #[test]
    fn full_scale_binary_count() {
        let n = 37;
        let returns: Vec<Vec<f64>> = (0..3).map(|j| (0..n).map(|i| ((i * 7 + j * 3) % 11) as f64 - 5.0).collect()).collect();
        let panel = AssetPanel::uniform(returns).unwrap();
        let mut y: Vec<f64> = (0..n).map(|i| (i % 9) as f64 - 4.0).collect();
        y.sort_by(f64::total_cmp);
        let y = DiscreteReturnDistribution::uniform(y).unwrap();
        let bounds = panel.support(&y, 0.0).unwrap();
        let m2 = build_m2(&panel, &y, 0.0, 0.18, 0.18, bounds, BuildOptions::default()).unwrap();
        assert_eq!(m2.count_kind(VarKind::Binary), 2 * n * n + n);
        assert_eq!(m2.count_kind(VarKind::Binary), 2775);
    }

    #[test]
    fn input_errors() {
        let (panel, y) = toy();
        let bounds = panel.support(&y, 0.0).unwrap();
        let unsorted = DiscreteReturnDistribution::uniform(vec![0.0, -1.0, 2.0]).unwrap();
        assert!(matches!(build_m1(&panel, &unsorted, 0.0, bounds, BuildOptions::default()), Err(Error::BenchmarkNotSorted)));
        assert!(matches!(build_m1(&panel, &y, 0.5, bounds, BuildOptions::default()), Err(Error::ReferenceNotOnGrid(_))));
        assert!(build_m2(&panel, &y, 0.0, 1.2, 0.1, bounds, BuildOptions::default()).is_err());
        let short = DiscreteReturnDistribution::uniform(vec![-1.0, 0.0]).unwrap();
        assert!(matches!(build_m1(&panel, &short, 0.0, bounds, BuildOptions::default()), Err(Error::LengthMismatch { .. })));
    }
}
