//! Deterministic random members of the utility and weighting classes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::utility::{PiecewisePwf, ReverseSUtility};
use crate::distribution::{SupportBounds, EPS};

/// Identity first, then gain and loss witnesses at evenly spaced thresholds
/// (alternating), then random reverse S-shaped utilities with 3 to 8
/// breakpoints per side.
pub fn sample_utilities(reference: f64, bounds: SupportBounds, count: usize, seed: u64) -> Vec<ReverseSUtility> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(ReverseSUtility::identity(bounds, reference).expect("identity is valid"));

    let (a, b) = (bounds.a.min(reference), bounds.b.max(reference));
    let witnesses = (count - 1) / 2;
    let per_side = witnesses.div_ceil(2).max(1);
    let mut w = 0;
    while out.len() < count && w < witnesses {
        let k = (w / 2) as f64 / per_side as f64;
        let u = if w % 2 == 0 {
            ReverseSUtility::gain_witness(bounds, reference, reference + k * (b - reference))
        } else {
            ReverseSUtility::loss_witness(bounds, reference, reference - k * (reference - a))
        };
        out.push(u.expect("witness thresholds lie inside the support"));
        w += 1;
    }

    while out.len() < count {
        out.push(random_utility(&mut rng, reference, a, b));
    }
    out
}

fn random_knots(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    let k = rng.gen_range(3..=8);
    let mut inner: Vec<f64> = (0..k - 2).map(|_| rng.gen_range(lo..hi)).collect();
    inner.sort_by(f64::total_cmp);
    let mut knots = vec![lo];
    for t in inner {
        if t > knots[knots.len() - 1] + EPS && t < hi - EPS {
            knots.push(t);
        }
    }
    knots.push(hi);
    knots
}

fn random_utility(rng: &mut ChaCha8Rng, r: f64, a: f64, b: f64) -> ReverseSUtility {
    let a = if a < r - EPS { a } else { r - 1.0 };
    let b = if b > r + EPS { b } else { r + 1.0 };
    let loss_knots = random_knots(rng, a, r);
    let gain_knots = random_knots(rng, r, b);
    let mut loss: Vec<f64> = (1..loss_knots.len()).map(|_| rng.gen_range(0.01..3.0)).collect();
    let mut gain: Vec<f64> = (1..gain_knots.len()).map(|_| rng.gen_range(0.01..3.0)).collect();
    loss.sort_by(|x, y| y.total_cmp(x));
    gain.sort_by(f64::total_cmp);
    let level = rng.gen_range(-1.0..1.0);
    ReverseSUtility::new(r, level, loss_knots, loss, gain_knots, gain).expect("constructed with valid shape")
}

/// Identity first, then random strictly increasing piecewise-linear weighting
/// functions that are concave on `[0, d]` (non-increasing slopes on every
/// segment starting before `d`) with arbitrary positive slopes afterwards.
pub fn sample_pwfs(d: f64, count: usize, seed: u64) -> Vec<PiecewisePwf> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(PiecewisePwf::identity());
    while out.len() < count {
        out.push(random_pwf(&mut rng, d));
    }
    out
}

fn random_pwf(rng: &mut ChaCha8Rng, d: f64) -> PiecewisePwf {
    let d = d.clamp(0.0, 1.0);
    let mut knots = vec![0.0];
    let pieces = rng.gen_range(1..=5);
    let mut inner: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.0..1.0)).collect();
    if d > EPS && d < 1.0 - EPS {
        inner.push(d);
    }
    inner.sort_by(f64::total_cmp);
    for t in inner {
        if t > knots[knots.len() - 1] + 1e-6 && t < 1.0 - 1e-6 {
            knots.push(t);
        }
    }
    knots.push(1.0);

    let segments = knots.len() - 1;
    let prefix = knots[..segments].iter().filter(|&&k| k < d - EPS).count();
    let mut slopes: Vec<f64> = (0..segments).map(|_| rng.gen_range(0.05..4.0)).collect();
    slopes[..prefix].sort_by(|x, y| y.total_cmp(x));
    // Occasionally a convex suffix, to exercise shapes beyond the prefix.
    if rng.gen_bool(0.5) {
        slopes[prefix..].sort_by(f64::total_cmp);
    }

    let total: f64 = knots.windows(2).zip(&slopes).map(|(k, s)| s * (k[1] - k[0])).sum();
    let mut values = vec![0.0];
    for (k, s) in knots.windows(2).zip(&slopes) {
        values.push(values[values.len() - 1] + s * (k[1] - k[0]) / total);
    }
    let last = values.len() - 1;
    values[last] = 1.0;
    PiecewisePwf::new(knots, values).expect("constructed with positive slopes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> SupportBounds {
        SupportBounds::new(-4.0, 5.0).unwrap()
    }

    #[test]
    fn deterministic_by_seed() {
        assert_eq!(sample_utilities(0.5, bounds(), 40, 7), sample_utilities(0.5, bounds(), 40, 7));
        assert_ne!(sample_utilities(0.5, bounds(), 40, 7), sample_utilities(0.5, bounds(), 40, 8));
        assert_eq!(sample_pwfs(0.18, 20, 3), sample_pwfs(0.18, 20, 3));
    }

    #[test]
    fn count_one_is_identity() {
        let u = sample_utilities(0.0, bounds(), 1, 1);
        assert_eq!(u, vec![ReverseSUtility::identity(bounds(), 0.0).unwrap()]);
        assert_eq!(sample_pwfs(0.3, 1, 1), vec![PiecewisePwf::identity()]);
    }

    #[test]
    fn includes_both_witness_families() {
        let us = sample_utilities(0.0, bounds(), 20, 1);
        // A pure gain witness is zero at and below r; a loss witness is zero at and above r.
        assert!(us.iter().any(|u| u.eval(-3.0) == 0.0 && u.eval(4.0) > 0.0));
        assert!(us.iter().any(|u| u.eval(4.0) == 0.0 && u.eval(-3.0) < 0.0));
    }

    #[test]
    fn shapes_hold() {
        for u in sample_utilities(-0.5, bounds(), 200, 11) {
            let (a, b) = u.domain();
            let grid: Vec<f64> = (0..=200).map(|i| a + (b - a) * i as f64 / 200.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&t| u.eval(t)).collect();
            assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
        for d in [0.0, 0.18, 0.5, 1.0] {
            for w in sample_pwfs(d, 100, 5) {
                assert!(w.is_concave_below(d));
                assert!(w.eval(0.0) == 0.0 && (w.eval(1.0) - 1.0).abs() < 1e-12);
            }
        }
    }
}
