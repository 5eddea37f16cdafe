use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn msd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msd"))
        .args(args)
        .current_dir(dir)
        .env_remove("MSD_SOLVER_BIN")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stdout))
    })
}

#[test]
fn check_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "x", "0 1 3\n");
    write(d.path(), "x2", "-1\n1\n1\n");
    write(d.path(), "y", "-1, 0, 2\n");

    let o = msd(&["check", "x", "y", "--criterion", "msd", "--reference", "0"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = msd(&["check", "x2", "y", "--criterion", "msd", "--reference", "0", "--json"], d.path());
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "msd.check.v1");
    assert_eq!(v["holds"], false);
    let violations = v["violations"].as_array().unwrap();
    assert!(violations.iter().any(|x| x["condition"] == "gain" && x["at"] == 1.0));

    let o = msd(&["check", "missing", "y"], d.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing"));
}

#[test]
fn check_flag_rules() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "x", "0 1 3\n");
    write(d.path(), "y", "-1 0 2\n");
    write(d.path(), "short", "0 1\n");

    assert_eq!(code(&msd(&["check", "x", "y", "--d-minus", "0.2"], d.path())), 2);
    assert_eq!(code(&msd(&["check", "x", "short"], d.path())), 2);
    assert_eq!(code(&msd(&["check", "x", "y", "--reference", "0.5"], d.path())), 2);

    let o = msd(&["check", "x", "y", "--reference", "0.5", "--augment", "--json"], d.path());
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["augmented"], true);
    assert_eq!(v["states"], 4);

    let o = msd(
        &["check", "x", "y", "--criterion", "mwsd", "--d-minus", "0.18", "--d-plus", "0.18", "--json"],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["d_plus"], 0.18);

    write(d.path(), "p", "0.5 0.25 0.25\n");
    let o = msd(&["check", "x", "y", "--probs", "p", "--reference", "median", "--json"], d.path());
    assert_eq!(stdout_json(&o)["reference"], -1.0);
}

#[test]
fn optimize_paths() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "assets.csv", "Food,Steel,Tech\n1,0,2\n-1,0.5,3\n2,-2,-1\n0.5,1,0\n");
    write(d.path(), "bench", "0.5\n-0.5\n0\n1\n");
    write(d.path(), "self.csv", "Mkt\n0.5\n-0.5\n0\n1\n");
    write(d.path(), "worse.csv", "Bad\n-0.5\n-1.5\n-1\n0\n");

    let o = msd(&["optimize", "--assets", "self.csv", "--benchmark", "bench", "--json"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "msd.optimize.v1");
    assert!((v["weights"][0]["weight"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["excess"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["certified"], true);

    let o = msd(
        &[
            "optimize", "--assets", "assets.csv", "--benchmark", "bench", "--criterion", "mwsd", "--d-minus", "0.18",
            "--d-plus", "0.18", "--output", "sol.json",
        ],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("sol.json")).unwrap()).unwrap();
    assert_eq!(v["model"], "mwsd_m2");
    assert!(v["excess"].as_f64().unwrap() > 0.0);
    let total: f64 = v["weights"].as_array().unwrap().iter().map(|w| w["weight"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-6);

    let o = msd(&["optimize", "--assets", "worse.csv", "--benchmark", "bench", "--reference", "0"], d.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("infeasible"));
}

#[test]
fn optimize_export_only() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "assets.csv", "1 0\n-1 0.5\n2 -2\n");
    write(d.path(), "bench", "0.5 -0.5 0\n");
    let o = msd(
        &["optimize", "--assets", "assets.csv", "--benchmark", "bench", "--export-only", "--export-mps", "m.mps", "--export-lp", "m.lp"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let mps = std::fs::read_to_string(d.path().join("m.mps")).unwrap();
    assert!(mps.starts_with("NAME"));
    assert!(mps.trim_end().ends_with("ENDATA"));
    assert!(d.path().join("m.lp").exists());

    let o = msd(&["optimize", "--assets", "assets.csv", "--benchmark", "bench", "--export-only"], d.path());
    assert_eq!(code(&o), 2);
    let o = msd(&["optimize", "--assets", "assets.csv", "--benchmark", "bench", "--solver", "env"], d.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("MSD_SOLVER_BIN"));
}

/// 48 months from 200001 of three industries, a market series equal to the
/// Food/Tech half-half mix and T-bills.
fn monthly_files(dir: &Path, gap_at: Option<usize>) {
    let mut ind = String::from("Date,Food,Steel,Tech\n");
    let mut mkt = String::from("Date,Mkt\n");
    let mut rf = String::from("Date,RF\n");
    for t in 0..48usize {
        let ym = 200001 + (t / 12) * 100 + t % 12;
        let s = ((t * 7) % 11) as f64 - 5.0;
        let (food, tech) = (s + 1.0, 1.5 * s + ((t * 3) % 5) as f64);
        let steel = if gap_at == Some(t) { "-99.99".to_string() } else { format!("{:.2}", 0.5 * s - 1.0) };
        ind.push_str(&format!("{ym},{food:.2},{steel},{tech:.2}\n"));
        mkt.push_str(&format!("{ym},{:.3}\n", (food + tech) / 2.0));
        rf.push_str(&format!("{ym},0.30\n"));
    }
    std::fs::write(dir.join("ind.csv"), ind).unwrap();
    std::fs::write(dir.join("mkt.csv"), mkt).unwrap();
    std::fs::write(dir.join("rf.csv"), rf).unwrap();
}

#[test]
fn backtest_runs_non_overlapping_windows() {
    let d = tempfile::tempdir().unwrap();
    monthly_files(d.path(), None);
    let o = msd(
        &[
            "backtest", "--industries", "ind.csv", "--benchmark", "mkt.csv", "--tbill", "rf.csv", "--window", "24",
            "--step", "24", "--out", "out", "--jobs", "2", "--time-limit", "60",
        ],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = d.path().join("out");
    for f in msd_core::experiment::OUTPUT_FILES {
        assert!(out.join(f).exists(), "{f}");
    }
    let excess = std::fs::read_to_string(out.join("excess_by_window.csv")).unwrap();
    assert_eq!(excess.lines().count(), 1 + 2 * 2 * 2);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("study_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema"], "msd.study.v1");
    assert_eq!(manifest["windows"], 2);
    assert_eq!(manifest["config"]["d_minus"], 0.18);
}

#[test]
fn backtest_reports_gaps_and_missing_tbills() {
    let d = tempfile::tempdir().unwrap();
    monthly_files(d.path(), Some(5));
    let base = ["backtest", "--industries", "ind.csv", "--benchmark", "mkt.csv", "--window", "12", "--step", "12", "--out", "out"];

    let o = msd(&base, d.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("T-bill"));

    let mut args = base.to_vec();
    args.extend(["--reference", "median", "--criteria", "msd", "--max-windows", "2"]);
    let o = msd(&args, d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("window 0 (200001-200012) skipped"), "{err}");
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out/study_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["rejected_windows"].as_array().unwrap().len(), 1);
    assert_eq!(manifest["cells"], 2);
}
