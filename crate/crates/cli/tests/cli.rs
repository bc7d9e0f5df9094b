use std::path::PathBuf;
use std::process::{Command, Output};

use reductive::gallery::{self, hyperbolic};
use reductive::{Exact, Mat, Scalar};
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reductive"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("reductive-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(args: &[&str], name: &str) -> (i32, Value) {
    let out = scratch(name);
    let mut all = args.to_vec();
    let path = out.to_str().unwrap().to_string();
    all.extend(["--out", &path]);
    let o = run(&all);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    (o.status.code().unwrap(), serde_json::from_str(&text).unwrap_or(Value::Null))
}

fn check_passed(r: &Value, name: &str) -> bool {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .map(|c| c["passed"].as_bool().unwrap())
        .unwrap_or_else(|| panic!("missing check {name}"))
}

#[test]
fn decompose_horosphere_exact() {
    let (code, r) = report(&["decompose", "--example", "horosphere", "--n", "3", "--mode", "exact"], "h3.json");
    assert_eq!(code, 0);
    assert!(check_passed(&r, "expected.m"));
    assert_eq!(r["observations"]["dims"]["m"], 2);
    assert_eq!(r["schema_version"], 1);
    assert!(r.get("timing_ms").is_none());
}

#[test]
fn decompose_punctured_euclidean_normal_direction() {
    let (code, r) = report(&["decompose", "--example", "punctured_euclidean", "--n", "4"], "p4.json");
    assert_eq!(code, 0);
    let n = r["decomposition"]["n"].as_array().unwrap();
    assert_eq!(n.len(), 1);
    let m: Mat<Exact> = Mat::from_json(&n[0]).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(m.get(i, j) != &Exact::from_i64(0), i == 4 && j == 4);
        }
    }
}

#[test]
fn non_invariant_custom_complement_is_an_input_error() {
    let f = gallery::build::<Exact>("horosphere", 3).unwrap();
    let mut m_bar: Vec<Mat<Exact>> = f.m_bar.basis().to_vec();
    let rot = hyperbolic::rotations::<Exact>(3)[0].clone();
    m_bar[0] = &m_bar[0] + &rot;
    let cfg = json!({
        "custom": {
            "base": "horosphere",
            "g": f.g.basis().iter().map(Mat::to_json).collect::<Vec<_>>(),
            "m_bar": m_bar.iter().map(Mat::to_json).collect::<Vec<_>>(),
        },
        "n": 3,
    });
    let path = scratch("bad.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let o = run(&["decompose", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ad_invariance(h_bar, m_bar)"), "{err}");

    // the same config with the true complement runs
    let good = json!({
        "custom": {
            "base": "horosphere",
            "g": f.g.basis().iter().map(Mat::to_json).collect::<Vec<_>>(),
            "m_bar": f.m_bar.basis().iter().map(Mat::to_json).collect::<Vec<_>>(),
        },
        "n": 3,
    });
    std::fs::write(&path, good.to_string()).unwrap();
    let o = run(&["decompose", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seeded_reports_are_byte_identical() {
    let a = scratch("seed_a.json");
    let b = scratch("seed_b.json");
    for p in [&a, &b] {
        let o = run(&[
            "verify", "--example", "horosphere", "--n", "3", "--seed", "7", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn transport_subset() {
    let (code, r) = report(&["verify", "--example", "horosphere", "--check", "transport"], "t.json");
    assert_eq!(code, 0);
    let names: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, vec!["transport.pushforward"]);
    let (code, r2) = report(&["transport", "--example", "horosphere"], "t2.json");
    assert_eq!(code, 0);
    assert_eq!(r["checks"], r2["checks"]);
}

#[test]
fn failing_gate_exits_one() {
    let (code, r) = report(
        &["verify", "--example", "horosphere", "--mode", "float", "--tol-negative", "10"],
        "fail.json",
    );
    assert_eq!(code, 1);
    assert_eq!(r["passed"], false);
    assert_eq!(r["verdicts"]["negative_control"], false);
}

#[test]
fn report_verb_rechecks_flags() {
    let path = scratch("saved.json");
    let o = run(&["decompose", "--example", "euclidean", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 failed"));

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["checks"][0]["value"] = json!(1.0);
    std::fs::write(&path, v.to_string()).unwrap();
    assert_eq!(run(&["report", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(run(&["decompose", "--example", "sphere"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "--example", "horosphere", "--n", "2"]).status.code(), Some(2));
    assert_eq!(
        run(&["decompose", "--example", "horosphere", "--tol-residual", "-1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["decompose", "--example", "horosphere", "--check", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["decompose"]).status.code(), Some(2));
}

#[test]
fn timing_is_opt_in_and_stdout_carries_json_without_out() {
    let o = run(&["decompose", "--example", "euclidean", "--timing"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["timing_ms"]["decomposition"].is_number());
    assert!(String::from_utf8_lossy(&o.stderr).contains("result"));
}

#[test]
fn killing_normalization_flag() {
    let (code, r) = report(
        &["decompose", "--example", "horosphere", "--n", "4", "--normalization", "killing"],
        "k.json",
    );
    assert_eq!(r["config"]["normalization"], "killing");
    // (k − 2)-scaled forms on so(4) and so(3) differ by a factor 2 on h × g
    assert_eq!(code, 1);
    let failed: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["principal.forms"]);
    let (code, _) = report(
        &["decompose", "--example", "horosphere", "--n", "3", "--normalization", "killing"],
        "k3.json",
    );
    assert_eq!(code, 0);
}
