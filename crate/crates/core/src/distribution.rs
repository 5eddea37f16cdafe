//! Discrete return distributions on a finite state-space.
//!
//! All functionals are exact sums over states. Comparisons between returns use
//! the absolute tolerance [`EPS`]; probabilities must sum to one within
//! [`PROB_SUM_TOL`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for return and probability comparisons.
pub const EPS: f64 = 1e-9;

/// Allowed deviation of the probability sum from one.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// State returns (percent units) paired with state probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteReturnDistribution {
    returns: Vec<f64>,
    probs: Vec<f64>,
}

pub(crate) fn validate_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidProbabilities("no states".into()));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
        return Err(Error::InvalidProbabilities(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidProbabilities(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(())
}

impl DiscreteReturnDistribution {
    pub fn new(returns: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if returns.len() != probs.len() {
            return Err(Error::LengthMismatch {
                what: "returns and probabilities",
                left: returns.len(),
                right: probs.len(),
            });
        }
        if returns.is_empty() {
            return Err(Error::InvalidReturns("distribution needs at least one state".into()));
        }
        if let Some(x) = returns.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidReturns(format!("non-finite return {x}")));
        }
        validate_probs(&probs)?;
        Ok(Self { returns, probs })
    }

    /// Equally likely states.
    pub fn uniform(returns: Vec<f64>) -> Result<Self> {
        let n = returns.len();
        if n == 0 {
            return Err(Error::InvalidReturns("distribution needs at least one state".into()));
        }
        Self::new(returns, uniform_probs(n))
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn min_return(&self) -> f64 {
        self.returns.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_return(&self) -> f64 {
        self.returns.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Adds a state with the given return and probability zero.
    pub fn with_null_state(&self, value: f64) -> Self {
        let mut out = self.clone();
        out.returns.push(value);
        out.probs.push(0.0);
        out
    }

    /// `P(X <= t)`, right-continuous.
    pub fn cdf(&self, t: f64) -> f64 {
        self.iter()
            .filter(|(x, _)| *x <= t + EPS)
            .map(|(_, p)| p)
            .sum()
    }

    /// `P(X < t)`, the left limit of the CDF at `t`.
    pub fn strict_cdf(&self, t: f64) -> f64 {
        self.iter()
            .filter(|(x, _)| *x < t - EPS)
            .map(|(_, p)| p)
            .sum()
    }

    /// Integrated CDF `F²(t) = Σ p_i max(t - x_i, 0)`.
    pub fn integrated_cdf(&self, t: f64) -> f64 {
        self.iter().map(|(x, p)| p * (t - x).max(0.0)).sum()
    }

    /// Expected upper partial moment `Σ p_i max(x_i - t, 0)`.
    pub fn upper_partial_moment(&self, t: f64) -> f64 {
        self.iter().map(|(x, p)| p * (x - t).max(0.0)).sum()
    }

    pub fn expected_return(&self) -> f64 {
        self.iter().map(|(x, p)| p * x).sum()
    }

    fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.returns.iter().copied().zip(self.probs.iter().copied())
    }
}

pub(crate) fn uniform_probs(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Interval `[a, b]` containing every return under consideration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBounds {
    pub a: f64,
    pub b: f64,
}

impl SupportBounds {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidBounds { a, b });
        }
        Ok(Self { a, b })
    }

    /// Smallest interval covering `values`; widened by one unit when degenerate.
    pub fn enclosing<I: IntoIterator<Item = f64>>(values: I) -> Result<Self> {
        let (lo, hi) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidReturns("no finite values to bound".into()));
        }
        if hi - lo < EPS {
            return Self::new(lo, lo + 1.0);
        }
        Self::new(lo, hi)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a - EPS && t <= self.b + EPS
    }
}

/// Candidate `x` and benchmark `y` on a shared state-space, states ordered so
/// that benchmark returns are non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPair {
    x: DiscreteReturnDistribution,
    y: DiscreteReturnDistribution,
    permutation: Vec<usize>,
}

/// Jointly permutes the states so that `y` is non-decreasing. The sort is
/// stable: tied benchmark returns keep their input order.
pub fn canonicalize(x_returns: &[f64], y_returns: &[f64], probs: &[f64]) -> Result<CanonicalPair> {
    if x_returns.len() != y_returns.len() {
        return Err(Error::LengthMismatch {
            what: "candidate and benchmark returns",
            left: x_returns.len(),
            right: y_returns.len(),
        });
    }
    if probs.len() != y_returns.len() {
        return Err(Error::LengthMismatch {
            what: "returns and probabilities",
            left: y_returns.len(),
            right: probs.len(),
        });
    }
    let mut order: Vec<usize> = (0..y_returns.len()).collect();
    order.sort_by(|&i, &j| y_returns[i].total_cmp(&y_returns[j]));
    let gather = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let p = gather(probs);
    let x = DiscreteReturnDistribution::new(gather(x_returns), p.clone())?;
    let y = DiscreteReturnDistribution::new(gather(y_returns), p)?;
    Ok(CanonicalPair {
        x,
        y,
        permutation: order,
    })
}

impl CanonicalPair {
    /// Canonicalizes two distributions that already share probabilities.
    pub fn from_distributions(
        x: &DiscreteReturnDistribution,
        y: &DiscreteReturnDistribution,
    ) -> Result<Self> {
        if x.probs() != y.probs() {
            if x.len() != y.len() {
                return Err(Error::LengthMismatch {
                    what: "candidate and benchmark states",
                    left: x.len(),
                    right: y.len(),
                });
            }
            return Err(Error::InvalidProbabilities(
                "candidate and benchmark must share state probabilities".into(),
            ));
        }
        canonicalize(x.returns(), y.returns(), y.probs())
    }

    pub fn x(&self) -> &DiscreteReturnDistribution {
        &self.x
    }

    pub fn y(&self) -> &DiscreteReturnDistribution {
        &self.y
    }

    pub fn probs(&self) -> &[f64] {
        self.y.probs()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `permutation()[k]` is the input index of canonical state `k`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Smallest support interval covering both distributions.
    pub fn bounds(&self) -> SupportBounds {
        SupportBounds::enclosing(
            self.x
                .returns()
                .iter()
                .chain(self.y.returns())
                .copied(),
        )
        .expect("validated distributions have finite returns")
    }

    /// Whether `r` coincides with some benchmark return.
    pub fn on_benchmark_grid(&self, r: f64) -> bool {
        self.y.returns().iter().any(|y| (y - r).abs() <= EPS)
    }
}
