use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn stoclot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stoclot"))
        .args(args)
        .env_remove("STOCLOT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes an instance and a demand with the given per-client `(p, r)`.
fn fixture(dir: &TempDir, kind: &str, n: usize, k: usize, p: f64, r: f64) -> (PathBuf, PathBuf) {
    let inst = dir.path().join("inst.json");
    let out = stoclot(&["gen", "--kind", kind, "--n", &n.to_string(), "--k", &k.to_string(), "--seed", "3", "-o", path_str(&inst)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    let chance: Vec<Value> = doc["clients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| json!({"client": c, "p": p, "r": r}))
        .collect();
    let expected: Vec<Value> = doc["clients"].as_array().unwrap().iter().map(|c| json!({"client": c, "t": r})).collect();
    let demand = dir.path().join("demand.json");
    std::fs::write(&demand, json!({"chance": chance, "expected": expected}).to_string()).unwrap();
    (inst, demand)
}

#[test]
fn gen_uniform_gadget() {
    let out = stoclot(&["gen", "--kind", "uniform_gadget", "--n", "5", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["k"], 2);
    assert_eq!(v["clients"].as_array().unwrap().len(), 5);
}

#[test]
fn missing_argument_is_an_input_error() {
    let out = stoclot(&["gen", "--kind", "uniform_gadget", "--n", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--k"), "{err}");
    assert!(err.to_lowercase().contains("usage"), "{err}");
}

#[test]
fn help_exits_zero() {
    assert_eq!(stoclot(&["--help"]).status.code(), Some(0));
    assert_eq!(stoclot(&["certify", "--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_instance_is_an_input_error() {
    let out = stoclot(&["determinize", "--instance", "/nonexistent/x.json", "--demand", "/nonexistent/y.json", "--mode", "exact-k"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn same_seed_same_bytes() {
    let dir = TempDir::new().unwrap();
    let (inst, demand) = fixture(&dir, "euclidean", 12, 3, 0.9, 0.6);
    let args = |seed: &str| {
        vec![
            "solve".to_string(),
            "lottery".into(),
            "--algo".into(),
            "scc".into(),
            "--instance".into(),
            path_str(&inst).into(),
            "--demand".into(),
            path_str(&demand).into(),
            "--samples".into(),
            "3000".into(),
            "--seed".into(),
            seed.into(),
        ]
    };
    let run = |a: Vec<String>| stoclot(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let a = run(args("7"));
    let b = run(args("7"));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report = stdout_json(&a);
    assert_eq!(report["samples"], 3000);
    assert_eq!(report["seed"], 7);
    assert_eq!(report["pass"], true);

    // The worker count does not change the result.
    let mut jobs = args("7");
    jobs.extend(["--jobs".into(), "3".into()]);
    assert_eq!(run(jobs).stdout, a.stdout);

    // The environment seed is a fallback for --seed.
    let mut plain = args("7");
    plain.truncate(plain.len() - 2);
    let env = Command::new(env!("CARGO_BIN_EXE_stoclot"))
        .args(&plain)
        .env("STOCLOT_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}

#[test]
fn single_draw_respects_k() {
    let dir = TempDir::new().unwrap();
    let (inst, demand) = fixture(&dir, "random_metric", 10, 2, 1.0, 1.0);
    for algo in ["faithful", "half-p", "iterative"] {
        let out = stoclot(&["solve", "chance", "--algo", algo, "--instance", path_str(&inst), "--demand", path_str(&demand), "--seed", "1"]);
        assert_eq!(out.status.code(), Some(0), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_json(&out);
        assert!(v["set"].as_array().unwrap().len() <= 2);
    }
}

#[test]
fn infeasible_demand_prints_certificate() {
    let dir = TempDir::new().unwrap();
    let (inst, demand) = fixture(&dir, "uniform_gadget", 6, 2, 1.0, 0.0);
    let out = stoclot(&["solve", "chance", "--algo", "faithful", "--instance", path_str(&inst), "--demand", path_str(&demand)]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["status"], "infeasible");
    assert!(v["certificate"]["kind"].is_string());
}

#[test]
fn determinize_exact_k_and_witness() {
    let dir = TempDir::new().unwrap();
    let (inst, demand) = fixture(&dir, "uniform_gadget", 4, 3, 1.0, 0.25);
    let out = stoclot(&["determinize", "--instance", path_str(&inst), "--demand", path_str(&demand), "--mode", "exact-k"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["beta_achieved"].as_f64().unwrap() <= 5.0);

    let (inst, demand) = fixture(&dir, "uniform_gadget", 4, 1, 1.0, 0.1);
    let out = stoclot(&["determinize", "--instance", path_str(&inst), "--demand", path_str(&demand), "--mode", "exact-k"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn expected_lottery_with_reduction() {
    let dir = TempDir::new().unwrap();
    let (inst, demand) = fixture(&dir, "uniform_gadget", 4, 3, 1.0, 0.25);
    let out = stoclot(&[
        "solve", "expected", "--instance", path_str(&inst), "--demand", path_str(&demand), "--epsilon", "0.5", "--reduce",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let atoms = v["atoms"].as_array().unwrap();
    assert!(!atoms.is_empty() && atoms.len() <= 5);
    let total: f64 = atoms.iter().map(|a| a["prob"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn certify_scc_and_bad_grid() {
    let out = stoclot(&["certify", "--mode", "scc", "--cells", "4096"]);
    assert_eq!(out.status.code(), Some(0));
    let b = stdout_json(&out)["bound"].as_f64().unwrap();
    assert!(b > 1.6 && b < 1.61);

    let out = stoclot(&["certify", "--mode", "partial", "--eps-grid", "0.3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn certify_partial_writes_output_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("cert.json");
    let out = stoclot(&["certify", "--mode", "partial", "--eps-grid", "2^-4", "--L", "3", "-o", path_str(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["bound"].as_f64().unwrap() > 1.0);
}

#[test]
fn verify_writes_report() {
    let dir = TempDir::new().unwrap();
    let (inst, demand) = fixture(&dir, "star", 8, 2, 1.0, 1.6);
    let report = dir.path().join("report.json");
    let out = stoclot(&[
        "verify", "--algo", "general", "--instance", path_str(&inst), "--demand", path_str(&demand), "--samples", "2000",
        "--report", path_str(&report),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["max_set_size"].as_u64().unwrap() <= 2);
}
