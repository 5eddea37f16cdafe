//! Piecewise-linear reverse S-shaped utilities and probability weighting
//! functions, used to cross-check dominance by sampling.

use serde::{Deserialize, Serialize};

use crate::distribution::{DiscreteReturnDistribution, SupportBounds, EPS};
use crate::error::{Error, Result};

const SHAPE_TOL: f64 = 1e-12;

/// Non-decreasing piecewise-linear utility, concave on `[a, r]` and convex on
/// `[r, b]`.
///
/// Stored as a level at the reference point plus slopes on the segments
/// between consecutive breakpoints on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseSUtility {
    reference: f64,
    level: f64,
    /// Breakpoints `a = l_0 < ... < l_k = r`.
    loss_knots: Vec<f64>,
    /// `loss_slopes[j]` applies on `[l_j, l_{j+1}]`; non-increasing.
    loss_slopes: Vec<f64>,
    /// Breakpoints `r = g_0 < ... < g_k = b`.
    gain_knots: Vec<f64>,
    /// `gain_slopes[j]` applies on `[g_j, g_{j+1}]`; non-decreasing.
    gain_slopes: Vec<f64>,
}

impl ReverseSUtility {
    pub fn new(
        reference: f64,
        level: f64,
        loss_knots: Vec<f64>,
        loss_slopes: Vec<f64>,
        gain_knots: Vec<f64>,
        gain_slopes: Vec<f64>,
    ) -> Result<Self> {
        let strictly_increasing = |k: &[f64]| k.windows(2).all(|w| w[0] < w[1]);
        let ok = loss_knots.len() >= 2
            && gain_knots.len() >= 2
            && loss_slopes.len() + 1 == loss_knots.len()
            && gain_slopes.len() + 1 == gain_knots.len()
            && strictly_increasing(&loss_knots)
            && strictly_increasing(&gain_knots)
            && (loss_knots[loss_knots.len() - 1] - reference).abs() <= EPS
            && (gain_knots[0] - reference).abs() <= EPS
            && loss_slopes.iter().chain(&gain_slopes).all(|s| s.is_finite() && *s >= 0.0)
            && loss_slopes.windows(2).all(|w| w[1] <= w[0] + SHAPE_TOL)
            && gain_slopes.windows(2).all(|w| w[1] >= w[0] - SHAPE_TOL)
            && level.is_finite();
        if !ok {
            return Err(Error::InvalidUtility(
                "breakpoints must span [a, r] and [r, b] with concave losses and convex gains".into(),
            ));
        }
        Ok(Self {
            reference,
            level,
            loss_knots,
            loss_slopes,
            gain_knots,
            gain_slopes,
        })
    }

    /// `u(t) = t` on the support.
    pub fn identity(bounds: SupportBounds, reference: f64) -> Result<Self> {
        let (a, b) = Self::padded(bounds, reference);
        Self::new(reference, reference, vec![a, reference], vec![1.0], vec![reference, b], vec![1.0])
    }

    /// `u(t) = max(t - threshold, 0)`, for `r <= threshold <= b`.
    pub fn gain_witness(bounds: SupportBounds, reference: f64, threshold: f64) -> Result<Self> {
        let (a, b) = Self::padded(bounds, reference);
        if threshold < reference - EPS || threshold > b + EPS {
            return Err(Error::InvalidUtility(format!("gain threshold {threshold} outside [r, b]")));
        }
        let (knots, slopes) = if threshold <= reference + EPS {
            (vec![reference, b], vec![1.0])
        } else if threshold >= b - EPS {
            (vec![reference, b], vec![0.0])
        } else {
            (vec![reference, threshold, b], vec![0.0, 1.0])
        };
        Self::new(reference, 0.0, vec![a, reference], vec![0.0], knots, slopes)
    }

    /// `u(t) = min(t - threshold, 0)`, for `a <= threshold <= r`.
    pub fn loss_witness(bounds: SupportBounds, reference: f64, threshold: f64) -> Result<Self> {
        let (a, b) = Self::padded(bounds, reference);
        if threshold > reference + EPS || threshold < a - EPS {
            return Err(Error::InvalidUtility(format!("loss threshold {threshold} outside [a, r]")));
        }
        let (knots, slopes) = if threshold <= a + EPS {
            (vec![a, reference], vec![0.0])
        } else if threshold >= reference - EPS {
            (vec![a, reference], vec![1.0])
        } else {
            (vec![a, threshold, reference], vec![1.0, 0.0])
        };
        Self::new(reference, 0.0, knots, slopes, vec![reference, b], vec![0.0])
    }

    /// Support bounds widened to contain the reference point.
    fn padded(bounds: SupportBounds, reference: f64) -> (f64, f64) {
        let a = bounds.a.min(reference - 1.0);
        let b = bounds.b.max(reference + 1.0);
        (a, b)
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    /// Interval `[a, b]` spanned by the breakpoints.
    pub fn domain(&self) -> (f64, f64) {
        (self.loss_knots[0], self.gain_knots[self.gain_knots.len() - 1])
    }

    fn check_domain(&self, dist: &DiscreteReturnDistribution) -> Result<()> {
        let (a, b) = self.domain();
        match dist.returns().iter().find(|&&x| x < a - EPS || x > b + EPS) {
            Some(&value) => Err(Error::OutsideDomain { value, a, b }),
            None => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t >= self.reference {
            let mut acc = self.level;
            for (w, s) in self.gain_knots.windows(2).zip(&self.gain_slopes) {
                if t <= w[0] {
                    return acc;
                }
                acc += s * (t.min(w[1]) - w[0]);
            }
            let last = self.gain_slopes.last().copied().unwrap_or(0.0);
            acc + last * (t - self.gain_knots[self.gain_knots.len() - 1]).max(0.0)
        } else {
            let mut acc = self.level;
            for (w, s) in self.loss_knots.windows(2).zip(&self.loss_slopes).rev() {
                if t >= w[1] {
                    return acc;
                }
                acc -= s * (w[1] - t.max(w[0]));
            }
            let first = self.loss_slopes.first().copied().unwrap_or(0.0);
            acc - first * (self.loss_knots[0] - t).max(0.0)
        }
    }
}

/// Piecewise-linear probability weighting function `w: [0,1] -> [0,1]`,
/// strictly increasing with `w(0) = 0`, `w(1) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePwf {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewisePwf {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let ok = knots.len() >= 2
            && knots.len() == values.len()
            && knots[0] == 0.0
            && knots[knots.len() - 1] == 1.0
            && values[0] == 0.0
            && (values[values.len() - 1] - 1.0).abs() <= 1e-12
            && knots.windows(2).all(|w| w[0] < w[1])
            && values.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidPwf(
                "needs strictly increasing values from w(0) = 0 to w(1) = 1".into(),
            ));
        }
        Ok(Self { knots, values })
    }

    pub fn identity() -> Self {
        Self {
            knots: vec![0.0, 1.0],
            values: vec![0.0, 1.0],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
            .collect()
    }

    /// True when the function is concave on `[0, d]`.
    pub fn is_concave_below(&self, d: f64) -> bool {
        let slopes = self.slopes();
        let active = self.knots.iter().take_while(|&&k| k < d - EPS).count();
        slopes[..active.min(slopes.len())]
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-9)
    }

    pub fn eval(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let j = self.knots.partition_point(|&k| k <= p).clamp(1, self.knots.len() - 1);
        let (k0, k1) = (self.knots[j - 1], self.knots[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        v0 + (v1 - v0) * (p - k0) / (k1 - k0)
    }
}

/// `E[u(X)]`.
pub fn markowitz_value(dist: &DiscreteReturnDistribution, u: &ReverseSUtility) -> Result<f64> {
    u.check_domain(dist)?;
    Ok(dist
        .returns()
        .iter()
        .zip(dist.probs())
        .map(|(x, p)| p * u.eval(*x))
        .sum())
}

/// Rank-dependent value with loss weighting `w_minus` on the cumulative
/// distribution and gain weighting `w_plus` on the decumulative one.
///
/// States at or below the reference point of `u` are losses. Outcomes are
/// valued as `u(x) - u(r)`: decision weights need not sum to one, so the
/// value is only meaningful relative to the reference point.
pub fn weighted_markowitz_value(
    dist: &DiscreteReturnDistribution,
    u: &ReverseSUtility,
    w_minus: &PiecewisePwf,
    w_plus: &PiecewisePwf,
) -> Result<f64> {
    u.check_domain(dist)?;
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&i, &j| dist.returns()[i].total_cmp(&dist.returns()[j]));
    let r = u.reference();
    let base = u.eval(r);
    let mut prev = 0.0;
    let mut value = 0.0;
    for &i in &order {
        let x = dist.returns()[i];
        let cum = (prev + dist.probs()[i]).min(1.0);
        let weight = if x <= r + EPS {
            w_minus.eval(cum) - w_minus.eval(prev)
        } else {
            w_plus.eval(1.0 - prev) - w_plus.eval(1.0 - cum)
        };
        value += (u.eval(x) - base) * weight;
        prev = cum;
    }
    Ok(value)
}
