//! First-order, Markowitz (MSD) and weighted Markowitz (MWSD) stochastic
//! dominance between a candidate and a benchmark on a shared discrete
//! state-space.
//!
//! MSD is decided on a finite grid of integrated-CDF comparisons: gains are
//! compared at every candidate return above the reference point and at the
//! reference point itself, losses at every benchmark return at or below it.
//! MWSD adds the conditional first-order comparison of strict candidate CDFs
//! against lagged benchmark CDFs.

mod sampling;
mod utility;
mod witness;

use serde::{Deserialize, Serialize};

use crate::distribution::{CanonicalPair, EPS};
use crate::error::{Error, Result};

pub use sampling::{sample_pwfs, sample_utilities};
pub use utility::{markowitz_value, weighted_markowitz_value, PiecewisePwf, ReverseSUtility};
pub use witness::msd_witness;

/// Default tolerance for dominance comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Fsd,
    Msd,
    Mwsd,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Criterion::Fsd => "fsd",
            Criterion::Msd => "msd",
            Criterion::Mwsd => "mwsd",
        })
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fsd" => Ok(Criterion::Fsd),
            "msd" => Ok(Criterion::Msd),
            "mwsd" => Ok(Criterion::Mwsd),
            other => Err(Error::Data(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Criterion, reference point and thresholds for a dominance check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceSpec {
    pub criterion: Criterion,
    pub reference: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub tolerance: f64,
    /// Also compare gains at `t = r`. Disabling this restricts the gain grid
    /// to candidate returns strictly above `r`, which is not sufficient for
    /// MSD on its own (see `tests::gain_grid_needs_reference_point`).
    pub reference_gain: bool,
    /// Apply the `d⁻` relaxation only below `r` and the `d⁺` cutoff only
    /// above it. Disabling this gives the per-state rule that ignores which
    /// side of `r` a benchmark interval lies on; that rule can accept pairs
    /// whose CDFs cross inside `[t_d⁻, t_d⁺)`
    /// (see `tests::conditional_fsd_respects_the_reference_side`).
    pub split_at_reference: bool,
}

impl DominanceSpec {
    pub fn fsd() -> Self {
        Self {
            criterion: Criterion::Fsd,
            reference: 0.0,
            d_minus: 1.0,
            d_plus: 1.0,
            tolerance: DEFAULT_TOLERANCE,
            reference_gain: true,
            split_at_reference: true,
        }
    }

    pub fn msd(reference: f64) -> Self {
        Self {
            criterion: Criterion::Msd,
            reference,
            ..Self::fsd()
        }
    }

    pub fn mwsd(reference: f64, d_minus: f64, d_plus: f64) -> Self {
        Self {
            criterion: Criterion::Mwsd,
            reference,
            d_minus,
            d_plus,
            ..Self::fsd()
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_reference_gain(mut self, enabled: bool) -> Self {
        self.reference_gain = enabled;
        self
    }

    pub fn with_split_at_reference(mut self, enabled: bool) -> Self {
        self.split_at_reference = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("d_minus", self.d_minus), ("d_plus", self.d_plus)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidThreshold { name, value });
            }
        }
        if !self.reference.is_finite() {
            return Err(Error::InvalidReturns("reference point must be finite".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidReturns("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Which dominance condition a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// Upper-tail integrated CDF comparison at a candidate gain `x_i > r`.
    Gain,
    /// Upper-tail comparison at the reference point itself.
    ReferenceGain,
    /// Integrated CDF comparison at a benchmark loss `y_i <= r`.
    Loss,
    /// Conditional first-order comparison `F̃_X(y_i) <= max{F_Y(y_{i-1}), d⁻}`.
    ConditionalFsd,
}

/// A failing comparison `lhs >= rhs` (or `lhs <= rhs` for
/// [`ConditionId::ConditionalFsd`]) at canonical state `state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: ConditionId,
    pub state: Option<usize>,
    pub at: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl Violation {
    /// Amount by which the comparison fails (positive).
    pub fn shortfall(&self) -> f64 {
        match self.condition {
            ConditionId::ConditionalFsd => self.lhs - self.rhs,
            _ => self.rhs - self.lhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub holds: bool,
    pub violations: Vec<Violation>,
    pub t_d_minus: f64,
    pub t_d_plus: f64,
}

impl DominanceVerdict {
    fn from_violations(violations: Vec<Violation>, (t_d_minus, t_d_plus): (f64, f64)) -> Self {
        Self {
            holds: violations.is_empty(),
            violations,
            t_d_minus,
            t_d_plus,
        }
    }
}

/// Sorted, deduplicated union of both return vectors.
fn merged_grid(pair: &CanonicalPair) -> Vec<f64> {
    let mut grid: Vec<f64> = pair
        .x()
        .returns()
        .iter()
        .chain(pair.y().returns())
        .copied()
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= EPS);
    grid
}

/// `F_X(t) <= F_Y(t)` at every point of the merged return grid.
pub fn check_fsd(pair: &CanonicalPair) -> bool {
    merged_grid(pair)
        .into_iter()
        .all(|t| pair.x().cdf(t) <= pair.y().cdf(t) + EPS)
}

fn require_grid_reference(pair: &CanonicalPair, spec: &DominanceSpec) -> Result<()> {
    spec.validate()?;
    if !pair.on_benchmark_grid(spec.reference) {
        return Err(Error::ReferenceNotOnGrid(spec.reference));
    }
    Ok(())
}

fn msd_violations(pair: &CanonicalPair, spec: &DominanceSpec) -> Vec<Violation> {
    let (x, y) = (pair.x(), pair.y());
    let r = spec.reference;
    let b = pair.bounds().b;
    let tail = |d: &crate::DiscreteReturnDistribution, t: f64| d.integrated_cdf(b) - d.integrated_cdf(t);
    let mut out = Vec::new();

    for (i, &xi) in x.returns().iter().enumerate() {
        if xi > r + EPS {
            let lhs = tail(y, xi);
            let rhs = tail(x, xi);
            if lhs < rhs - spec.tolerance {
                out.push(Violation {
                    condition: ConditionId::Gain,
                    state: Some(i),
                    at: xi,
                    lhs,
                    rhs,
                });
            }
        }
    }
    if spec.reference_gain {
        let lhs = tail(y, r);
        let rhs = tail(x, r);
        if lhs < rhs - spec.tolerance {
            out.push(Violation {
                condition: ConditionId::ReferenceGain,
                state: y.returns().iter().position(|v| (v - r).abs() <= EPS),
                at: r,
                lhs,
                rhs,
            });
        }
    }
    for (i, &yi) in y.returns().iter().enumerate() {
        if yi <= r + EPS {
            let lhs = y.integrated_cdf(yi);
            let rhs = x.integrated_cdf(yi);
            if lhs < rhs - spec.tolerance {
                out.push(Violation {
                    condition: ConditionId::Loss,
                    state: Some(i),
                    at: yi,
                    lhs,
                    rhs,
                });
            }
        }
    }
    out
}

/// Decides `X ⪰ Y` by MSD.
pub fn check_msd(pair: &CanonicalPair, spec: &DominanceSpec) -> Result<DominanceVerdict> {
    require_grid_reference(pair, spec)?;
    let violations = msd_violations(pair, spec);
    Ok(DominanceVerdict::from_violations(
        violations,
        compute_t_bounds(pair, spec),
    ))
}

/// Interval `[t_d⁻, t_d⁺)` on which MWSD requires first-order dominance.
///
/// `t_d⁻` is the supremum of `{a} ∪ {t <= r : F_X(t) <= d⁻, F_Y(t) <= d⁻}` and
/// `t_d⁺` the infimum of `{b} ∪ {t >= r : F_X(t) >= 1-d⁺, F_Y(t) >= 1-d⁺}`.
pub fn compute_t_bounds(pair: &CanonicalPair, spec: &DominanceSpec) -> (f64, f64) {
    let (x, y) = (pair.x(), pair.y());
    let bounds = pair.bounds();
    let r = spec.reference;
    let grid = merged_grid(pair);

    // Both CDFs are right-continuous steps, so the lower set is an open ray
    // ending at the first jump where max(F_X, F_Y) exceeds d⁻.
    let lower_break = grid
        .iter()
        .copied()
        .take_while(|&t| t <= r + EPS)
        .find(|&t| x.cdf(t).max(y.cdf(t)) > spec.d_minus + EPS);
    let t_minus = lower_break.unwrap_or(r).max(bounds.a);

    let threshold = 1.0 - spec.d_plus;
    let meets = |t: f64| x.cdf(t).min(y.cdf(t)) >= threshold - EPS;
    let t_plus = if meets(r) {
        r
    } else {
        grid.iter()
            .copied()
            .filter(|&t| t > r)
            .find(|&t| meets(t))
            .unwrap_or(bounds.b)
            .min(bounds.b)
    };
    (t_minus, t_plus)
}

/// Upper bound on `P(X < y_i)` for the benchmark interval `[y_{i-1}, y_i)`,
/// or `None` when the interval is exempt. `lagged` is `F_Y(y_{i-1})`, zero
/// for the first state. With `split` the interval is a loss interval when
/// `y_i <= r` (relaxed to `d⁻`, never exempt) and a gain interval otherwise
/// (exempt once `lagged >= 1 - d⁺`, no relaxation).
pub fn conditional_fsd_bound(y_i: f64, lagged: f64, r: f64, d_minus: f64, d_plus: f64, split: bool) -> Option<f64> {
    let below_cutoff = lagged < 1.0 - d_plus - EPS;
    if !split {
        return below_cutoff.then(|| lagged.max(d_minus));
    }
    if y_i <= r + EPS {
        Some(lagged.max(d_minus))
    } else {
        below_cutoff.then_some(lagged)
    }
}

fn conditional_fsd_violations(pair: &CanonicalPair, spec: &DominanceSpec) -> Vec<Violation> {
    let (x, y) = (pair.x(), pair.y());
    let ys = y.returns();
    let mut out = Vec::new();
    for (i, &yi) in ys.iter().enumerate() {
        let lagged = if i == 0 { 0.0 } else { y.cdf(ys[i - 1]) };
        let Some(rhs) =
            conditional_fsd_bound(yi, lagged, spec.reference, spec.d_minus, spec.d_plus, spec.split_at_reference)
        else {
            continue;
        };
        let lhs = x.strict_cdf(yi);
        if lhs > rhs + spec.tolerance {
            out.push(Violation {
                condition: ConditionId::ConditionalFsd,
                state: Some(i),
                at: yi,
                lhs,
                rhs,
            });
        }
    }
    out
}

/// Decides `X ⪰_{d⁻}^{d⁺} Y` by MWSD: MSD plus conditional first-order
/// dominance on `[t_d⁻, t_d⁺)`, checked per benchmark interval.
pub fn check_mwsd(pair: &CanonicalPair, spec: &DominanceSpec) -> Result<DominanceVerdict> {
    require_grid_reference(pair, spec)?;
    let mut violations = msd_violations(pair, spec);
    violations.extend(conditional_fsd_violations(pair, spec));
    Ok(DominanceVerdict::from_violations(
        violations,
        compute_t_bounds(pair, spec),
    ))
}

/// Dispatches on `spec.criterion`.
pub fn check(pair: &CanonicalPair, spec: &DominanceSpec) -> Result<DominanceVerdict> {
    match spec.criterion {
        Criterion::Msd => check_msd(pair, spec),
        Criterion::Mwsd => check_mwsd(pair, spec),
        Criterion::Fsd => {
            spec.validate()?;
            let (x, y) = (pair.x(), pair.y());
            let violations = merged_grid(pair)
                .into_iter()
                .filter_map(|t| {
                    let (lhs, rhs) = (x.cdf(t), y.cdf(t));
                    (lhs > rhs + spec.tolerance.max(EPS)).then_some(Violation {
                        condition: ConditionId::ConditionalFsd,
                        state: None,
                        at: t,
                        lhs,
                        rhs,
                    })
                })
                .collect();
            Ok(DominanceVerdict::from_violations(
                violations,
                compute_t_bounds(pair, spec),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::canonicalize;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const U3: [f64; 3] = [1.0 / 3.0; 3];

    fn pair(x: &[f64], y: &[f64], p: &[f64]) -> CanonicalPair {
        canonicalize(x, y, p).unwrap()
    }

    #[test]
    fn fsd_examples() {
        assert!(check_fsd(&pair(&[0.0, 1.0, 3.0], &[-1.0, 0.0, 2.0], &U3)));
        assert!(check_fsd(&pair(&[-1.0, 0.0, 2.0], &[-1.0, 0.0, 2.0], &U3)));
        assert!(!check_fsd(&pair(&[-1.0, 1.0, 1.0], &[-1.0, 0.0, 2.0], &U3)));
    }

    #[test]
    fn msd_shifted_candidate_dominates() {
        let v = check_msd(&pair(&[0.0, 1.0, 3.0], &[-1.0, 0.0, 2.0], &U3), &DominanceSpec::msd(0.0)).unwrap();
        assert!(v.holds, "{v:?}");
    }

    #[test]
    fn msd_is_reflexive_at_equality() {
        let v = check_msd(&pair(&[-1.0, 0.0, 2.0], &[-1.0, 0.0, 2.0], &U3), &DominanceSpec::msd(0.0).with_tolerance(0.0)).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn msd_gain_violation_at_one() {
        let v = check_msd(&pair(&[-1.0, 1.0, 1.0], &[-1.0, 0.0, 2.0], &U3), &DominanceSpec::msd(0.0)).unwrap();
        assert!(!v.holds);
        let gain: Vec<_> = v.violations.iter().filter(|v| v.condition == ConditionId::Gain).collect();
        assert_eq!(gain.len(), 2, "both states with x=1 fail");
        assert_eq!(gain[0].at, 1.0);
        assert_abs_diff_eq!(gain[0].lhs, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gain[0].rhs, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn msd_requires_reference_on_grid() {
        let p = pair(&[0.0, 1.0, 3.0], &[-1.0, 0.0, 2.0], &U3);
        assert!(matches!(check_msd(&p, &DominanceSpec::msd(0.5)), Err(Error::ReferenceNotOnGrid(_))));
        assert!(check_msd(&p, &DominanceSpec::mwsd(0.0, 1.5, 0.0)).is_err());
    }

    #[test]
    fn gain_grid_needs_reference_point() {
        // Candidate mass sits at r while the benchmark has mass above it: every
        // candidate gain passes, yet E[X] = 1 < E[Y] = 4/3.
        let p = pair(&[0.0, 0.0, 3.0], &[0.0, 2.0, 2.0], &U3);
        let states_only = DominanceSpec::msd(0.0).with_reference_gain(false);
        assert!(check_msd(&p, &states_only).unwrap().holds);
        let full = check_msd(&p, &DominanceSpec::msd(0.0)).unwrap();
        assert!(!full.holds);
        assert_eq!(full.violations[0].condition, ConditionId::ReferenceGain);
        assert!(p.x().expected_return() < p.y().expected_return());
    }

    #[test]
    fn t_bounds_examples() {
        let p = pair(&[0.0, 1.0, 3.0], &[-1.0, 0.0, 2.0], &U3);
        let b = p.bounds();
        assert_eq!(compute_t_bounds(&p, &DominanceSpec::mwsd(0.0, 0.0, 0.0)), (b.a, b.b));
        assert_eq!(compute_t_bounds(&p, &DominanceSpec::mwsd(0.0, 1.0, 1.0)), (0.0, 0.0));
        let q = pair(&[-1.0, 1.0, 1.0], &[-1.0, 0.0, 2.0], &U3);
        assert_eq!(compute_t_bounds(&q, &DominanceSpec::mwsd(0.0, 0.18, 0.18)), (-1.0, 2.0));
    }

    #[test]
    fn mwsd_examples() {
        let p = pair(&[0.0, 1.0, 3.0], &[-1.0, 0.0, 2.0], &U3);
        let v = check_mwsd(&p, &DominanceSpec::mwsd(0.0, 0.18, 0.18)).unwrap();
        assert!(v.holds, "{v:?}");
        assert!(v.t_d_minus <= 0.0 && 0.0 <= v.t_d_plus);

        let same = pair(&[-1.0, 0.0, 2.0], &[-1.0, 0.0, 2.0], &U3);
        for d in [0.0, 0.18, 0.5, 1.0] {
            assert!(check_mwsd(&same, &DominanceSpec::mwsd(0.0, d, d)).unwrap().holds);
        }

        let q = pair(&[-1.0, 1.0, 1.0], &[-1.0, 0.0, 2.0], &U3);
        let msd = check_msd(&q, &DominanceSpec::msd(0.0)).unwrap();
        let mwsd = check_mwsd(&q, &DominanceSpec::mwsd(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(msd.holds, mwsd.holds);
        assert_eq!(msd.violations, mwsd.violations);
    }

    #[test]
    fn conditional_fsd_certificate() {
        // Candidate puts 1/3 below the benchmark minimum: MSD holds (large upside)
        // but the first state fails the conditional FSD check for small d⁻.
        let p = pair(&[-1.5, 3.0, 4.0], &[-1.0, 0.0, 2.0], &U3);
        assert!(!check_fsd(&p));
        let v = check_mwsd(&p, &DominanceSpec::mwsd(0.0, 0.18, 0.18)).unwrap();
        let fsd: Vec<_> = v.violations.iter().filter(|v| v.condition == ConditionId::ConditionalFsd).collect();
        assert_eq!(fsd.len(), 1);
        assert_eq!(fsd[0].state, Some(0));
        assert!(check_mwsd(&p, &DominanceSpec::mwsd(0.0, 0.5, 0.18)).unwrap().violations.iter().all(|v| v.condition != ConditionId::ConditionalFsd));
    }

    #[test]
    fn conditional_fsd_respects_the_reference_side() {
        // CDFs cross at 2.25, inside [t_d⁻, t_d⁺) = [2, 3). The lagged CDF at
        // y = 3 is 0.8 >= 1 - d⁺, so the side-blind rule exempts that state.
        let x = [-2.5, -3.0, 2.0, 2.0, 2.25];
        let y = [-4.0, -2.75, 2.0, 2.0, 3.0];
        let p = pair(&x, &y, &[0.2; 5]);
        let spec = DominanceSpec::mwsd(3.0, 0.5, 0.25);
        assert_eq!(compute_t_bounds(&p, &spec), (2.0, 3.0));
        assert!(p.x().cdf(2.25) > p.y().cdf(2.25));

        let v = check_mwsd(&p, &spec).unwrap();
        let fsd: Vec<_> = v.violations.iter().filter(|v| v.condition == ConditionId::ConditionalFsd).collect();
        assert_eq!(fsd.len(), 1, "{v:?}");
        assert_eq!(fsd[0].at, 3.0);
        assert_abs_diff_eq!(fsd[0].lhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fsd[0].rhs, 0.8, epsilon = 1e-12);

        let blind = check_mwsd(&p, &spec.with_split_at_reference(false)).unwrap();
        assert!(blind.violations.iter().all(|v| v.condition != ConditionId::ConditionalFsd));
    }

    #[test]
    fn conditional_fsd_bound_cases() {
        // Loss side: relaxed to d⁻ and never exempt.
        assert_eq!(conditional_fsd_bound(-1.0, 0.1, 0.0, 0.2, 0.3, true), Some(0.2));
        assert_eq!(conditional_fsd_bound(0.0, 0.9, 0.0, 0.2, 0.3, true), Some(0.9));
        assert_eq!(conditional_fsd_bound(0.0, 0.9, 0.0, 0.2, 0.3, false), None);
        // Gain side: exact below the cutoff, exempt above it.
        assert_eq!(conditional_fsd_bound(1.0, 0.1, 0.0, 0.2, 0.3, true), Some(0.1));
        assert_eq!(conditional_fsd_bound(1.0, 0.1, 0.0, 0.2, 0.3, false), Some(0.2));
        assert_eq!(conditional_fsd_bound(1.0, 0.7, 0.0, 0.2, 0.3, true), None);
    }

    /// `F_X <= F_Y` at every grid point of `[t_d⁻, t_d⁺)`.
    fn fsd_on_window(p: &CanonicalPair, spec: &DominanceSpec) -> bool {
        let (lo, hi) = compute_t_bounds(p, spec);
        std::iter::once(lo)
            .chain(merged_grid(p))
            .filter(|&t| t >= lo - EPS && t < hi - EPS)
            .all(|t| p.x().cdf(t) <= p.y().cdf(t) + spec.tolerance)
    }

    fn instance() -> impl Strategy<Value = (CanonicalPair, f64)> {
        (2usize..9)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(-5.0f64..5.0, n),
                    prop::collection::vec(-2.0f64..3.0, n),
                    0..n,
                    any::<bool>(),
                )
            })
            .prop_map(|(y, shift, r_idx, uniform)| {
                let n = y.len();
                let x: Vec<f64> = y.iter().zip(&shift).map(|(a, s)| ((a + s) * 4.0).round() / 4.0).collect();
                let y: Vec<f64> = y.iter().map(|v| (v * 4.0).round() / 4.0).collect();
                let p: Vec<f64> = if uniform {
                    vec![1.0 / n as f64; n]
                } else {
                    let w: Vec<f64> = (0..n).map(|i| 1.0 + (i * 7 % 5) as f64).collect();
                    let s: f64 = w.iter().sum();
                    w.iter().map(|v| v / s).collect()
                };
                let r = y[r_idx];
                (canonicalize(&x, &y, &p).unwrap(), r)
            })
    }

    proptest! {
        #[test]
        fn reflexive(inst in instance(), d1 in 0.0f64..=1.0, d2 in 0.0f64..=1.0) {
            let (p, r) = inst;
            let same = canonicalize(p.y().returns(), p.y().returns(), p.probs()).unwrap();
            prop_assert!(check_msd(&same, &DominanceSpec::msd(r)).unwrap().holds);
            prop_assert!(check_mwsd(&same, &DominanceSpec::mwsd(r, d1, d2)).unwrap().holds);
        }

        #[test]
        fn fsd_implies_msd((p, r) in instance()) {
            if check_fsd(&p) {
                prop_assert!(check_msd(&p, &DominanceSpec::msd(r)).unwrap().holds);
            }
        }

        #[test]
        fn mwsd_implies_msd((p, r) in instance(), d1 in 0.0f64..=1.0, d2 in 0.0f64..=1.0) {
            if check_mwsd(&p, &DominanceSpec::mwsd(r, d1, d2)).unwrap().holds {
                prop_assert!(check_msd(&p, &DominanceSpec::msd(r)).unwrap().holds);
            }
        }

        #[test]
        fn msd_implies_mean_dominance((p, r) in instance()) {
            if check_msd(&p, &DominanceSpec::msd(r)).unwrap().holds {
                prop_assert!(p.x().expected_return() >= p.y().expected_return() - 1e-8);
            }
        }

        #[test]
        fn full_thresholds_collapse_to_msd((p, r) in instance()) {
            let msd = check_msd(&p, &DominanceSpec::msd(r)).unwrap();
            let mwsd = check_mwsd(&p, &DominanceSpec::mwsd(r, 1.0, 1.0)).unwrap();
            prop_assert_eq!(msd.holds, mwsd.holds);
        }

        #[test]
        fn conditional_fsd_matches_the_window((p, r) in instance(), d1 in 0.0f64..=1.0, d2 in 0.0f64..=1.0) {
            let spec = DominanceSpec::mwsd(r, d1, d2);
            let v = check_mwsd(&p, &spec).unwrap();
            let fsd_part = v.violations.iter().all(|v| v.condition != ConditionId::ConditionalFsd);
            prop_assert_eq!(fsd_part, fsd_on_window(&p, &spec));
        }

        #[test]
        fn side_blind_rule_is_weaker((p, r) in instance(), d1 in 0.0f64..=1.0, d2 in 0.0f64..=1.0) {
            let spec = DominanceSpec::mwsd(r, d1, d2);
            if check_mwsd(&p, &spec).unwrap().holds {
                prop_assert!(check_mwsd(&p, &spec.with_split_at_reference(false)).unwrap().holds);
            }
        }

        #[test]
        fn zero_thresholds_give_fsd_below_upper_bound((p, r) in instance()) {
            // With d⁻ = d⁺ = 0 the conditional check covers every benchmark
            // state, which is first-order dominance on the full grid.
            let v = check_mwsd(&p, &DominanceSpec::mwsd(r, 0.0, 0.0)).unwrap();
            let fsd_part = v.violations.iter().all(|v| v.condition != ConditionId::ConditionalFsd);
            prop_assert_eq!(fsd_part, check_fsd(&p));
        }
    }
}
