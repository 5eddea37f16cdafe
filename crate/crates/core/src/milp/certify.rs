use super::build::AssetPanel;
use super::solve::SolveOutcome;
use crate::distribution::{canonicalize, DiscreteReturnDistribution};
use crate::dominance::{check_msd, check_mwsd, Criterion, DominanceSpec, DominanceVerdict};
use crate::error::{Error, Result};

/// Tolerance used when certifying solver output, looser than the solver's
/// feasibility tolerance.
pub const CERTIFY_TOLERANCE: f64 = 1e-6;

/// Re-checks an optimal portfolio against the benchmark with the dominance
/// checkers. A failing verdict points at a big-M or tolerance defect.
pub fn certify(
    outcome: &SolveOutcome,
    panel: &AssetPanel,
    benchmark: &DiscreteReturnDistribution,
    spec: &DominanceSpec,
) -> Result<DominanceVerdict> {
    if !outcome.is_optimal() {
        return Err(Error::NotOptimal(outcome.status.to_string()));
    }
    certify_weights(&outcome.weights, panel, benchmark, spec)
}

/// Dominance verdict for the portfolio with weights `lambda`.
pub fn certify_weights(
    lambda: &[f64],
    panel: &AssetPanel,
    benchmark: &DiscreteReturnDistribution,
    spec: &DominanceSpec,
) -> Result<DominanceVerdict> {
    if lambda.len() != panel.num_assets() {
        return Err(Error::LengthMismatch {
            what: "weights and assets",
            left: lambda.len(),
            right: panel.num_assets(),
        });
    }
    let x = panel.portfolio(lambda);
    let pair = canonicalize(&x, benchmark.returns(), benchmark.probs())?;
    let spec = spec.with_tolerance(spec.tolerance.max(CERTIFY_TOLERANCE));
    match spec.criterion {
        Criterion::Mwsd => check_mwsd(&pair, &spec),
        _ => check_msd(&pair, &spec),
    }
}
