use serde::{Deserialize, Serialize};

use super::model::BigMValues;
use crate::distribution::SupportBounds;
use crate::error::{Error, Result};

/// Safety margin applied on top of each derived bound.
pub const SAFETY_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BigMFamily {
    /// Rows comparing two returns: order links and gates, strict-below flags,
    /// and the reference-gain link.
    Pairwise,
    /// Gain indicators `x_i - r <= M ξ_i` and the reference-gain gate.
    Indicator,
    /// Integrated-CDF rows at gains.
    Aggregate,
}

/// Smallest valid constant for `family` on support `[a, b]`, inflated by
/// [`SAFETY_MARGIN`].
///
/// Two returns differ by at most `b - a`, a return exceeds `r` by at most
/// `b - r`, and each of the φ and ψ sums in an aggregate row is at most
/// `b - a`.
pub fn big_m(bounds: SupportBounds, reference: f64, family: BigMFamily) -> Result<f64> {
    let (a, b) = (bounds.a, bounds.b);
    if !(a < b) {
        return Err(Error::InvalidBounds { a, b });
    }
    let base = match family {
        BigMFamily::Pairwise => b - a,
        BigMFamily::Indicator => (b - reference).max(0.0),
        BigMFamily::Aggregate => 2.0 * (b - a),
    };
    Ok(base * (1.0 + SAFETY_MARGIN))
}

impl BigMValues {
    pub fn derive(bounds: SupportBounds, reference: f64) -> Result<Self> {
        Ok(Self {
            pairwise: big_m(bounds, reference, BigMFamily::Pairwise)?,
            indicator: big_m(bounds, reference, BigMFamily::Indicator)?,
            aggregate: big_m(bounds, reference, BigMFamily::Aggregate)?,
        })
    }
}
