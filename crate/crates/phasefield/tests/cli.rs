use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use phasefield::output::sha256_hex;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phasefield"));
    c.env_remove("PHASEFIELD_OUT");
    c
}

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("phasefield-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&p);
    p
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("summary.json")).unwrap()).unwrap()
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[test]
fn sigma_prints_three_references() {
    let out = scratch("sigma");
    let o = run(&["sigma", "--well", "quartic", "--a-law", "1,4", "--theta-law", "1,2"], &out);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("1.88562") && text.contains("2.92119"), "{text}");
    let s = summary(&out);
    assert_eq!(s["status"], "ok");
    assert!((s["result"]["sigma_bar"].as_f64().unwrap() - 2.921_186_973_360_886).abs() < 1e-12);

    let o = run(&["sigma", "--well", "quartic", "--a-law", "1", "--theta-law", "1"], &out);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.matches("1.88562").count(), 3);
}

#[test]
fn bad_flags_exit_two_and_are_mirrored() {
    let out = scratch("bad");
    let o = run(&["sigma", "--well", "sextic"], &out);
    assert_eq!(o.status.code(), Some(2));
    let s = summary(&out);
    assert_eq!(s["status"], "error");
    assert_eq!(s["exit_code"], 2);
    assert!(s["error"].as_str().unwrap().contains("sextic"));

    let cfg = workspace_file("configs/homog.json");
    let o = run(&["sweep", cfg.to_str().unwrap(), "--samples", "8"], &out);
    assert_eq!(o.status.code(), Some(2));

    let bad = out.join("bad.json");
    fs::write(&bad, br#"{"schema": 1, "command": "lamp", "alpha": 1, "window_len": 10, "n_windows": 1, "lengths": [4], "extra": 3}"#).unwrap();
    let o = run(&["lamp", bad.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn constant_solve_recovers_sigma() {
    let out = scratch("solve");
    let o = run(&["solve", "--medium", "constant", "--eps", "0.05"], &out);
    assert!(o.status.success());
    let r = &summary(&out)["result"];
    assert!(r["rel_to_sigma_w"].as_f64().unwrap().abs() < 0.02);
    assert_eq!(r["invariants_ok"], true);
    let csv = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(csv.starts_with("x,u\n"));
}

#[test]
fn manifest_hash_matches_config_and_reruns_are_identical() {
    let a = scratch("rep-a");
    let b = scratch("rep-b");
    let args = ["tails", "--quantity", "osc", "--r", "4,8", "--samples", "300", "--seed", "11"];
    assert!(run(&args, &a).status.success());
    assert!(bin().args(args).args(["--jobs", "4", "--out"]).arg(&b).status().unwrap().success());
    let manifest: Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], sha256_hex(&fs::read(a.join("config.json")).unwrap()));
    assert_eq!(manifest["seed0"], 11);
    for f in ["config.json", "manifest.json", "tails.csv", "tails.dat", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn jobs_do_not_change_lamp_tables() {
    let a = scratch("lamp-1");
    let b = scratch("lamp-8");
    let base = ["lamp", "--windows", "6", "--window-len", "4000", "--lengths", "2,4,8", "--seed", "5"];
    assert!(bin().args(base).args(["--jobs", "1", "--out"]).arg(&a).status().unwrap().success());
    assert!(bin().args(base).args(["--jobs", "8", "--out"]).arg(&b).status().unwrap().success());
    assert_eq!(fs::read(a.join("lamp.csv")).unwrap(), fs::read(b.join("lamp.csv")).unwrap());
}

#[test]
fn environment_overrides_out_flag() {
    let env_dir = scratch("env");
    let flag_dir = scratch("flag");
    let o = bin()
        .env("PHASEFIELD_OUT", &env_dir)
        .args(["liouville", "--n-max", "2", "--m", "1", "--out"])
        .arg(&flag_dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_dir.join("manifest.json").exists());
    assert!(!flag_dir.exists());
}

#[test]
fn sample_failures_above_threshold_exit_one() {
    let out = scratch("partial");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("cfg.json");
    fs::write(
        &cfg,
        br#"{"schema": 1, "command": "sweep",
            "law": {"atoms": [{"a": 1, "theta": 1, "weight": 1}, {"a": 4, "theta": 2, "weight": 1}]},
            "eps_grid": [0.1], "scaling": {"family": "power", "beta": 2},
            "rho": 0.25, "n_samples": 8, "seed0": 2,
            "minimize": {"newton": {"max_iterations": 1}}}"#,
    )
    .unwrap();
    let o = run(&["sweep", cfg.to_str().unwrap()], &out.join("run"));
    assert_eq!(o.status.code(), Some(1));
    let s = summary(&out.join("run"));
    assert_eq!(s["status"], "partial_failure");
    assert_eq!(s["result"]["too_many_failures"], true);
}

#[test]
fn shipped_config_parses() {
    let doc = phasefield::cli::load_document(&workspace_file("configs/homog.json")).unwrap();
    assert_eq!(doc.run.command(), "sweep");
}
