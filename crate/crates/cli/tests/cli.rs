use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = mcft_cli::run(std::iter::once("mcft").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, _) = run(&full);
    (code, serde_json::from_str(&out).unwrap())
}

const THETA_L: &str =
    "Theta_L = -rho*y_t dy^dx - tau*y_x dy^dt + (rho*y_t^2/2 - tau*y_x^2/2 + gamma*s_t) dt^dx + ds_t^dx - ds_x^dt\n";

#[test]
fn derive_prints_theta_l() {
    let (code, out, _) = run(&["derive", &model("string.mcft")]);
    assert_eq!(code, 0);
    assert!(out.contains(THETA_L), "{out}");
    assert!(out.contains("sigma_L = gamma dt"), "{out}");
}

#[test]
fn derive_hamiltonian() {
    let (code, out, _) = run(&["derive", "--hamiltonian", &model("string.mcft")]);
    assert_eq!(code, 0);
    assert!(out.contains("H = p_t^2/(2*rho) - p_x^2/(2*tau) + gamma*s_t\n"), "{out}");
}

#[test]
fn zero_lagrangian() {
    let (code, out, _) = run(&["derive", &model("zero.mcft")]);
    assert_eq!(code, 0);
    assert!(out.contains("Theta_L = ds_t^dx - ds_x^dt\n"), "{out}");
    let (code, _, err) = run(&["derive", "--hamiltonian", &model("zero.mcft")]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn check_symmetry_verdicts() {
    let m = model("string.mcft");
    let (code, v) = json(&["check-symmetry", &m, "Y"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["report"]["classification"], "strong-noether");
    assert_eq!(v["outputs"]["report"]["current"], "-rho*y_t dx - tau*y_x dt");

    let (code, out, _) = run(&["check-symmetry", &m, "S"]);
    assert_eq!(code, 1);
    assert!(out.contains("not-noether") && out.contains("gamma"), "{out}");

    let (code, _, _) = run(&["--set", "gamma=0", "check-symmetry", &m, "S"]);
    assert_eq!(code, 0);

    let (code, _, err) = run(&["check-symmetry", &m, "Nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("Nope"), "{err}");
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mcft");
    std::fs::write(&bad, "coords t x\nfields y\nlagrangian y_t^2\n").unwrap();
    let (code, v) = json(&["derive", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["outputs"]["error"]["line"], 3);
    assert!(v["outputs"]["error"]["message"].as_str().unwrap().contains("dy[t]"));

    assert_eq!(run(&["derive", "/no/such/file.mcft"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["--set", "gamma", "sopde", &model("string.mcft")]).0, 2);
}

#[test]
fn cfl_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(model("string.mcft")).unwrap();
    let fast = src.replace("cfl=0.5", "cfl=1.5");
    let fast = if fast == src { src.replace("t=2", "t=2 cfl=1.5") } else { fast };
    let path = dir.path().join("fast.mcft");
    std::fs::write(&path, fast).unwrap();
    let (code, v) = json(&["verify-law", path.to_str().unwrap(), "Y", "decay"]);
    assert_eq!(code, 3, "{v}");
    assert!(v["outputs"]["error"]["message"].as_str().unwrap().contains("CFL"));
}

#[test]
fn sopde_free_symbols() {
    let (code, out, _) = run(&["sopde", &model("string.mcft")]);
    assert_eq!(code, 0);
    assert!(out.contains("free: A5 A7 B4 B5 B6 B7"), "{out}");
}

#[test]
fn reports_validate_and_repeat() {
    let schema = mcft_cli::schema::run_report_schema();
    let m = model("pair.mcft");
    for args in [vec!["derive", &m], vec!["check-symmetry", &m, "R"], vec!["current", &m, "U"], vec!["derive", "missing"]] {
        let (_, a) = json(&args);
        let (_, b) = json(&args);
        assert_eq!(a, b);
        assert!(mcft_cli::schema::validate(&schema, &a).is_empty(), "{a}");
        assert!(a.get("timing_ms").is_none());
    }
    let (_, v) = json(&["--timing", "sopde", &m]);
    assert!(v["timing_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn binary_simulate_csv() {
    let out = Command::new(env!("CARGO_BIN_EXE_mcft"))
        .args(["simulate", &model("string.mcft"), "rest"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,x,value"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0")), "rest data should stay zero");

    let help = Command::new(env!("CARGO_BIN_EXE_mcft")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
