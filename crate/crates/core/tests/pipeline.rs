use std::time::Duration;

use msd_core::data::rolling_windows;
use msd_core::{
    build_m2, certify, emit_outputs, run_study, solve, AssetPanel, BuildOptions, Criterion, DiscreteReturnDistribution,
    DominanceSpec, Limits, NativeAdapter, ReturnSeries, SolveStatus, StudyConfig, YearMonth,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three industries over 48 months on a quarter-point grid, a market equal
/// to the mean of the first two and a flat T-bill rate.
fn monthly(seed: u64) -> (Vec<ReturnSeries>, ReturnSeries, ReturnSeries) {
    let start = YearMonth::new(1990, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let industries: Vec<ReturnSeries> = (0..3)
        .map(|j| {
            let v = (0..48).map(|_| (rng.gen_range(-24..=28) as f64) / 4.0).collect();
            ReturnSeries::complete(format!("I{j}"), start, v)
        })
        .collect();
    let market = (0..48).map(|t| (industries[0].values[t].unwrap() + industries[1].values[t].unwrap()) / 2.0).collect();
    (
        industries,
        ReturnSeries::complete("Mkt", start, market),
        ReturnSeries::complete("RF", start, vec![0.25; 48]),
    )
}

#[test]
fn rolling_study_end_to_end() {
    let (industries, market, rf) = monthly(7);
    let set = rolling_windows(&industries, &market, Some(&rf), 12, 12).unwrap();
    assert_eq!(set.windows.len(), 4);
    assert!(set.rejected.is_empty());

    // Some windows are hard for the built-in solver; a short limit keeps the
    // test quick and exercises the time-limit path.
    let config = StudyConfig {
        jobs: 2,
        limits: Limits { time: Duration::from_secs(2), gap: 1e-6 },
        ..StudyConfig::default()
    };
    let (results, summary) = run_study(&set.windows, &config, &NativeAdapter::default()).unwrap();
    assert_eq!(results.len(), 4 * 2 * 2);
    assert!(results.iter().filter(|r| r.is_optimal()).count() >= 8);
    for r in &results {
        assert!(matches!(r.status, SolveStatus::Optimal | SolveStatus::TimeLimit), "{r:?}");
        // The market is itself a feasible portfolio, so every run has an incumbent.
        assert_eq!(r.certified, r.is_optimal().then_some(true), "{r:?}");
        assert!(r.excess.unwrap() >= -1e-6);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
    }
    // MWSD is the stronger criterion, so its optimum cannot beat MSD's.
    for msd in results.iter().filter(|r| r.criterion == Criterion::Msd && r.is_optimal()) {
        let mwsd = results
            .iter()
            .find(|r| r.criterion == Criterion::Mwsd && r.window == msd.window && r.reference_mode == msd.reference_mode)
            .unwrap();
        if mwsd.is_optimal() {
            assert!(msd.excess.unwrap() >= mwsd.excess.unwrap() - 1e-6, "{msd:?} {mwsd:?}");
        }
    }

    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&results, &summary, &config, &set.rejected, dir.path()).unwrap();
    for f in msd_core::experiment::OUTPUT_FILES {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn side_blind_model_admits_a_non_dominating_portfolio() {
    // Holding only the first asset satisfies MSD but its CDF rises above the
    // benchmark's at 2.25, inside the first-order window [2, 3).
    let y = vec![-4.0, -2.75, 2.0, 2.0, 3.0];
    let x = vec![-2.5, -3.0, 2.0, 2.0, 2.25];
    let panel = AssetPanel::uniform(vec![x, y.clone()]).unwrap();
    let bench = DiscreteReturnDistribution::uniform(y).unwrap();
    let (r, d_minus, d_plus) = (3.0, 0.5, 0.25);
    let bounds = panel.support(&bench, r).unwrap();
    let spec = DominanceSpec::mwsd(r, d_minus, d_plus);
    let limits = Limits::default();
    let adapter = NativeAdapter::default();

    let literal = BuildOptions { reference_gain: true, ..BuildOptions::literal() };
    let blind = solve(&build_m2(&panel, &bench, r, d_minus, d_plus, bounds, literal).unwrap(), &adapter, &limits).unwrap();
    assert!(blind.is_optimal());
    assert!(!certify(&blind, &panel, &bench, &spec).unwrap().holds);
    assert!(certify(&blind, &panel, &bench, &spec.with_split_at_reference(false)).unwrap().holds);

    let exact = solve(
        &build_m2(&panel, &bench, r, d_minus, d_plus, bounds, BuildOptions::default()).unwrap(),
        &adapter,
        &limits,
    )
    .unwrap();
    assert!(exact.is_optimal());
    assert!(certify(&exact, &panel, &bench, &spec).unwrap().holds);
    assert!(exact.objective.unwrap() <= blind.objective.unwrap() + 1e-9);
}
