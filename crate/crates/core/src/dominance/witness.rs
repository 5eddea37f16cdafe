use super::utility::ReverseSUtility;
use super::{check_msd, ConditionId, DominanceSpec};
use crate::distribution::CanonicalPair;
use crate::error::Result;

/// A utility under which the benchmark is strictly preferred, built from the
/// largest MSD violation, or `None` when MSD holds.
///
/// A gain violation at `t` yields `u(s) = max(s - t, 0)`; a loss violation at
/// `t` yields `u(s) = min(s - t, 0)`. In both cases the value gap equals the
/// violation's shortfall.
pub fn msd_witness(pair: &CanonicalPair, spec: &DominanceSpec) -> Result<Option<ReverseSUtility>> {
    let verdict = check_msd(pair, spec)?;
    // Earliest violation among those with the largest shortfall.
    let Some(worst) = verdict
        .violations
        .iter()
        .reduce(|best, v| if v.shortfall() > best.shortfall() { v } else { best })
    else {
        return Ok(None);
    };
    let bounds = pair.bounds();
    let u = match worst.condition {
        ConditionId::Gain | ConditionId::ReferenceGain => {
            ReverseSUtility::gain_witness(bounds, spec.reference, worst.at)?
        }
        ConditionId::Loss | ConditionId::ConditionalFsd => {
            ReverseSUtility::loss_witness(bounds, spec.reference, worst.at)?
        }
    };
    Ok(Some(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{canonicalize, DiscreteReturnDistribution};
    use crate::dominance::markowitz_value;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gain_witness_example() {
        let p = canonicalize(&[-1.0, 1.0, 1.0], &[-1.0, 0.0, 2.0], &[1.0 / 3.0; 3]).unwrap();
        let u = msd_witness(&p, &DominanceSpec::msd(0.0)).unwrap().unwrap();
        for (t, v) in [(0.5, 0.0), (1.0, 0.0), (2.0, 1.0)] {
            assert_abs_diff_eq!(u.eval(t), v, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(markowitz_value(p.x(), &u).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(markowitz_value(p.y(), &u).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn loss_witness_example() {
        // r = 0 is not a benchmark return, so the pair is augmented with a
        // zero-probability state at the reference point first.
        let x = DiscreteReturnDistribution::new(vec![-2.0, 2.0], vec![0.5, 0.5]).unwrap().with_null_state(0.0);
        let y = DiscreteReturnDistribution::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap().with_null_state(0.0);
        let p = CanonicalPair::from_distributions(&x, &y).unwrap();
        let u = msd_witness(&p, &DominanceSpec::msd(0.0)).unwrap().unwrap();
        for (t, v) in [(-2.0, -1.0), (-1.0, 0.0), (0.0, 0.0), (2.0, 0.0)] {
            assert_abs_diff_eq!(u.eval(t), v, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(markowitz_value(p.x(), &u).unwrap(), -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(markowitz_value(p.y(), &u).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn none_when_dominance_holds() {
        let p = canonicalize(&[0.0, 1.0, 3.0], &[-1.0, 0.0, 2.0], &[1.0 / 3.0; 3]).unwrap();
        assert!(msd_witness(&p, &DominanceSpec::msd(0.0)).unwrap().is_none());
    }
}
