use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tfe_core::hodograph::PhysicalProfile;

fn tfe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfe"))
        .args(args)
        .output()
        .expect("tfe runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let out = tfe(&a);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

/// Short nonlinear runs on a coarse grid.
fn quick_config(dir: &Path) -> String {
    let p = dir.join("quick.json");
    fs::write(
        &p,
        r#"{"grid": {"count": 256}, "dt": 0.01, "t_end": 1.0, "stride": 5, "decay_window": [0.2, 1.0]}"#,
    )
    .unwrap();
    p.to_str().unwrap().to_string()
}

fn offsets(n: usize) -> Vec<f64> {
    (0..n).map(|i| (-11.0 + 15.0 * i as f64 / (n - 1) as f64).exp()).collect()
}

fn profile_file(dir: &Path, p: &PhysicalProfile) -> String {
    let path = dir.join("profile.csv");
    p.write_csv(fs::File::create(&path).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn schedule_reports_k_and_lattice() {
    let out = tfe(&["schedule", "--n0", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("k = 3"));

    let (code, v) = json(&["schedule", "--n0", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["lattice"]["entries"].as_array().unwrap().len(), 6);
    assert_eq!(v["report"]["conditions"]["linear_pass"], Value::Bool(true));
}

#[test]
fn schedule_rejects_large_n0() {
    assert_eq!(tfe(&["schedule", "--n0", "5"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_lists_every_check() {
    let (code, v) = json(&["verify"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["passed"], Value::Bool(true));
    for c in v["report"]["checks"].as_array().unwrap() {
        assert!(c["lhs"].is_number() && c["rhs"].is_number(), "{c}");
    }
}

#[test]
fn verify_catches_wrong_beta() {
    let (code, v) = json(&["verify", "--inject-beta", "0.6"]);
    assert_eq!(code, 1);
    let failed: Vec<&str> = v["report"]["failed"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert!(failed.contains(&"p(beta)"), "{failed:?}");
}

#[test]
fn verify_is_deterministic_across_execution_modes() {
    let a = tfe(&["verify", "--json", "--seed", "3"]);
    let b = tfe(&["verify", "--json", "--seed", "3", "--sequential"]);
    assert_eq!(a.stdout, b.stdout);
    let c = tfe(&["verify", "--json", "--seed", "4"]);
    let hash = |o: &Output| serde_json::from_slice::<Value>(&o.stdout).unwrap()["config_hash"].clone();
    assert_ne!(hash(&a), hash(&c));
}

#[test]
fn zero_data_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let (code, v) = json(&["nonlinear", "--config", &cfg, "--epsilon", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["stationary"], Value::Bool(true));
    assert_eq!(v["report"]["max_change"].as_f64(), Some(0.0));
}

#[test]
fn nonlinear_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = tfe(&["nonlinear", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read(out.join("nonlinear.json")).unwrap(),
            fs::read(out.join("nonlinear_trajectory.csv")).unwrap(),
        )
    };
    let (a, b) = (run("a"), run("b"));
    assert!(a == b);
    let header = String::from_utf8_lossy(&a.1).lines().next().unwrap().to_string();
    assert_eq!(header, "t,s,x,value");
}

#[test]
fn expansion_of_traveling_wave() {
    let dir = tempfile::tempdir().unwrap();
    let p = PhysicalProfile::power_law(0.5, 1.0, &offsets(1500)).unwrap();
    let (code, v) = json(&["expansion", "--profile", &profile_file(dir.path(), &p)]);
    assert_eq!(code, 0);
    let r = &v["report"];
    assert!((r["contact_speed"].as_f64().unwrap() - 0.375).abs() < 1e-6);
    for t in r["fit"]["terms"].as_array().unwrap() {
        assert!(t["coefficient"].as_f64().unwrap().abs() < 1e-6, "{t}");
    }
}

#[test]
fn expansion_of_constant_is_a_dilation() {
    let dir = tempfile::tempdir().unwrap();
    let c = 0.2;
    let p = PhysicalProfile::power_law(0.0, 1.0 + c, &offsets(1500)).unwrap();
    let (code, v) = json(&["expansion", "--profile", &profile_file(dir.path(), &p)]);
    assert_eq!(code, 0);
    let t = &v["report"]["transported"];
    let h0 = t["h_tilde"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["exponent"].as_f64() == Some(0.0))
        .unwrap()["coefficient"]
        .as_f64()
        .unwrap();
    assert!((h0 - ((1.0 + c) as f64).powf(1.5) + 1.0).abs() < 1e-6, "{h0}");
    for e in t["inverse"].as_array().unwrap() {
        assert!(e["coefficient"].as_f64().unwrap().abs() < 1e-6, "{e}");
    }
    let speed = v["report"]["contact_speed"].as_f64().unwrap();
    assert!((speed - 0.375 * (1.0 + c).powi(3)).abs() < 1e-6);
}

#[test]
fn bad_inputs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "z,h\n0,0\n1,1\n2,1\n3,2\n4,3\n5,4\n").unwrap();
    assert_eq!(tfe(&["expansion", "--profile", bad.to_str().unwrap()]).status.code(), Some(2));
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n_zero": 2}"#).unwrap();
    assert_eq!(tfe(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(tfe(&["nonlinear", "--sweep", "1e-3"]).status.code(), Some(2));
}

#[test]
fn large_data_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    assert_eq!(tfe(&["nonlinear", "--config", &cfg, "--epsilon", "1"]).status.code(), Some(3));
}

#[test]
fn mms_mode_reports_orders() {
    let (code, v) = json(&["linear", "--mms"]);
    assert_eq!(code, 0);
    assert!(v["report"]["mms"]["min_order"].as_f64().unwrap() >= 1.8);
}
