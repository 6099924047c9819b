use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn hawklab(out: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_hawklab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("HAWKLAB_OUT")
        .output()
        .expect("spawn hawklab")
        .status
        .code()
        .expect("exit code")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sht_check_passes_and_rejects_low_band() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hawklab(dir.path(), &["sht-check"]), 0);
    let r = report(&dir.path().join("sht_report.json"));
    assert_eq!(r["schema"], 1);
    assert_eq!(r["identities_passed"], 15);
    assert_eq!(hawklab(&dir.path().join("low"), &["--band-limit", "4", "sht-check"]), 2);
}

#[test]
fn meanfield_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hawklab(dir.path(), &["meanfield", "--trials", "3", "--p2-draws", "20"]), 0);
    let r = report(&dir.path().join("uniqueness_report.json"));
    assert_eq!(r["report"]["converged"], 3);
    let trace = std::fs::read_to_string(dir.path().join("traces/trial_0000_newton.csv")).unwrap();
    assert!(trace.starts_with("k,sup_norm,residual,u1_norm,u2_norm\n"));
    assert_eq!(hawklab(dir.path(), &["meanfield", "--delta", "0.3", "--trials", "1"]), 2);
    assert_eq!(hawklab(dir.path(), &["--band-limit", "6", "meanfield"]), 2);
}

#[test]
fn spectrum_sources() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hawklab(dir.path(), &["spectrum"]), 0);
    let r = report(&dir.path().join("spectrum_report.json"));
    let mults: Vec<u64> =
        r["spectrum"]["eigenvalues"].as_array().unwrap().iter().map(|e| e["multiplicity"].as_u64().unwrap()).collect();
    assert_eq!(mults, [1, 3, 5]);

    let good = dir.path().join("u.txt");
    std::fs::write(&good, "# small bump\n0 0 0.1\n2 0 0.05\n").unwrap();
    let file = good.to_str().unwrap();
    assert_eq!(hawklab(&dir.path().join("f"), &["spectrum", "--u", "file", "--u-file", file]), 0);

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0 0 0.1\n2 1 x\n").unwrap();
    let file = bad.to_str().unwrap();
    assert_eq!(hawklab(&dir.path().join("b"), &["spectrum", "--u", "file", "--u-file", file]), 2);
}

#[test]
fn profile_metrics() {
    let dir = tempfile::tempdir().unwrap();
    for (name, extra) in [
        ("flat", &[][..]),
        ("schwarzschild", &["--m", "1"][..]),
        ("hyperbolic", &["--mode", "hyperbolic"][..]),
        ("mass-profile", &[][..]),
    ] {
        let out = dir.path().join(name);
        let mut args = vec!["profile", "--metric", name, "--points", "40"];
        args.extend_from_slice(extra);
        assert_eq!(hawklab(&out, &args), 0, "{name}");
        let csv = std::fs::read_to_string(out.join("profile.csv")).unwrap();
        assert!(csv.starts_with("V,I,I_plus,H,mH_plus,mH_plus_normalized,R_at_r,stability_gap\n"));
        assert_eq!(csv.lines().count(), 41);
    }
    let flat = report(&dir.path().join("flat/profile_report.json"));
    assert_eq!(flat["shi_bound"]["equality"], true);
    let mp = report(&dir.path().join("mass-profile/profile_report.json"));
    assert_eq!(mp["shi_bound"]["equality"], false);
    let args = ["profile", "--metric", "schwarzschild", "--small-volume", "true"];
    assert_eq!(hawklab(&dir.path().join("sv"), &args), 2);
}

#[test]
fn config_file_and_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "metric=schwarzschild\nm=2\npoints=10\n").unwrap();
    let out = dir.path().join("env_out");
    let run = Command::new(env!("CARGO_BIN_EXE_hawklab"))
        .args(["--config", cfg.to_str().unwrap(), "profile", "--m", "1"])
        .env("HAWKLAB_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    let r = report(&out.join("profile_report.json"));
    assert_eq!(r["metric"], "schwarzschild(m=1)");
    assert_eq!(r["points"], 10);
}
