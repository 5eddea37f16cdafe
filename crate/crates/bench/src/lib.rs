//! Seeded instance generators shared by the benchmarks.

use msd_core::{canonicalize, AssetPanel, CanonicalPair, DiscreteReturnDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Candidate/benchmark pair on `n` equally likely states, returns in
/// `[-5, 5]`. The candidate is the benchmark plus noise with a small
/// positive drift, so both verdicts show up.
pub fn random_pair(n: usize, seed: u64) -> CanonicalPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let x: Vec<f64> = y.iter().map(|v| (v + 0.3 + rng.gen_range(-0.5..0.5)).clamp(-5.0, 5.0)).collect();
    canonicalize(&x, &y, &vec![1.0 / n as f64; n]).expect("valid instance")
}

/// A sorted benchmark, an `m`-asset panel on the same `n` states and a
/// reference point on the benchmark grid (the lower median).
pub struct PanelInstance {
    pub panel: AssetPanel,
    pub benchmark: DiscreteReturnDistribution,
    pub reference: f64,
}

/// Assets are factor-driven around the benchmark, like industry returns
/// around the market.
pub fn random_panel(m: usize, n: usize, seed: u64) -> PanelInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    y.sort_by(f64::total_cmp);
    let returns: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let beta = rng.gen_range(0.5..1.5);
            let alpha = rng.gen_range(-0.2..0.4);
            y.iter().map(|v| alpha + beta * v + rng.gen_range(-1.0..1.0)).collect()
        })
        .collect();
    let probs = vec![1.0 / n as f64; n];
    let labels = (1..=m).map(|j| format!("A{j}")).collect();
    PanelInstance {
        panel: AssetPanel::new(returns, labels, probs.clone()).expect("valid panel"),
        reference: y[(n - 1) / 2],
        benchmark: DiscreteReturnDistribution::new(y, probs).expect("valid benchmark"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(random_pair(12, 3).x().returns(), random_pair(12, 3).x().returns());
        let a = random_panel(4, 10, 1);
        assert_eq!(a.panel.num_assets(), 4);
        assert!(a.benchmark.returns().windows(2).all(|w| w[0] <= w[1]));
        assert!(a.benchmark.returns().contains(&a.reference));
    }
}
