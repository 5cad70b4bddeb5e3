use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn homsol(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_homsol"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("HOMSOL_THREADS", t),
        None => cmd.env_remove("HOMSOL_THREADS"),
    };
    cmd.output().expect("homsol should run")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).expect("report exists")).expect("report is JSON")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Structural equality; numbers agree to a relative 1e-12 so the goldens
/// survive libm differences across platforms.
fn assert_matches(actual: &Value, expected: &Value, path: &str) {
    match (actual, expected) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{path}: {a} vs {b}");
        }
        (Value::Object(a), Value::Object(b)) => {
            let ka: Vec<_> = a.keys().collect();
            let kb: Vec<_> = b.keys().collect();
            assert_eq!(ka, kb, "{path}: keys differ");
            for (k, v) in b {
                assert_matches(&a[k], v, &format!("{path}.{k}"));
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            assert_eq!(a.len(), b.len(), "{path}: lengths differ");
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                assert_matches(x, y, &format!("{path}[{i}]"));
            }
        }
        _ => assert_eq!(actual, expected, "{path}"),
    }
}

fn check_golden(name: &str, args: &[&str]) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_owned();
    full.extend(["--out", &out_str]);
    let o = homsol(&full, None);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut report = read_json(&out);
    report["config"]["out"] = Value::Null;
    let golden = golden_dir().join(format!("{name}.json"));
    if std::env::var_os("HOMSOL_BLESS").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&golden, serde_json::to_string_pretty(&report).unwrap() + "\n").unwrap();
    }
    let expected = read_json(&golden);
    assert_matches(&report, &expected, name);
}

#[test]
fn golden_classify_speclag_plane_cubic() {
    check_golden("classify_speclag_n2_d3", &["classify", "--op", "speclag:c=0", "--n", "2", "--d", "3", "--samples", "200"]);
}

#[test]
fn golden_classify_anisotropic_linear() {
    check_golden(
        "classify_linear_aniso_n2_d3",
        &["classify", "--op", "linear:A=[[4,0],[0,1]]", "--n", "2", "--d", "3", "--samples", "200"],
    );
}

#[test]
fn golden_verify() {
    check_golden(
        "verify_cylindrical_cubic",
        &["verify", "--op", "speclag:c=0", "--n", "3", "--poly", "x1^3 - 3*x1*x2^2", "--samples", "200"],
    );
}

#[test]
fn golden_spectrum_circle() {
    check_golden("spectrum_circle_64", &["spectrum", "--n", "2", "--grid", "64", "--k", "9"]);
}

#[test]
fn classify_report_has_seven_cubics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = homsol(&["classify", "--op", "speclag:c=0", "--n", "3", "--d", "3", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&out);
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["config", "diagnostics", "family", "residuals", "version"]);
    assert_eq!(r["family"]["kind"], "HarmonicPolynomialFamily");
    assert_eq!(r["family"]["basis"].as_array().unwrap().len(), 7);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn degree_two_exits_with_code_2() {
    let o = homsol(&["classify", "--op", "linear:A=[[1,0],[0,1]]", "--n", "2", "--d", "2"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d = 2"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_code_1() {
    for args in [
        vec!["classify", "--op", "linear:A=[[1,2],[2,1]]", "--n", "2", "--d", "3"],
        vec!["classify", "--op", "speclag:c=abc", "--n", "2", "--d", "3"],
        vec!["classify", "--n", "3"],
        vec!["verify", "--n", "3"],
        vec!["frobnicate"],
        vec!["spectrum", "--n", "3", "--grid", "48by96"],
        vec!["hunt", "--n", "5"],
    ] {
        let o = homsol(&args, None);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).trim().is_empty());
    }
    let o = homsol(&["classify", "--op", "speclag:c=abc", "--n", "2", "--d", "3"], None);
    assert!(stderr(&o).contains("position 10"), "{}", stderr(&o));
}

#[test]
fn classifier_tolerances_come_from_flags() {
    let base = ["classify", "--op", "speclag:c=1e-10", "--n", "2", "--d", "3"];
    let strict = homsol(&base, None);
    assert!(strict.status.success());
    let r: Value = serde_json::from_slice(&strict.stdout).unwrap();
    assert_eq!(r["family"]["kind"], "NoSolutions");
    let mut loose = base.to_vec();
    loose.extend(["--f-zero-tol", "1e-9"]);
    let r: Value = serde_json::from_slice(&homsol(&loose, None).stdout).unwrap();
    assert_eq!(r["family"]["kind"], "HarmonicPolynomialFamily");
    let o = homsol(&["classify", "--op", "linear:A=[[2,0],[0,1]]", "--n", "2", "--d", "3", "--ellipticity-floor", "1.5"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = homsol(&["spectrum", "--n", "2", "--grid", "16", "--k", "3"], Some("many"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("HOMSOL_THREADS"));
}

#[test]
fn json_goes_to_stdout_without_out() {
    let o = homsol(&["spectrum", "--n", "2", "--grid", "16", "--k", "3"], None);
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["spectrum"]["clusters"][0]["multiplicity"], 1);
    assert!(stderr(&o).contains("spectrum on 16"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"operator": "linear:A=[[2,0],[0,1]]", "n": 2, "d": 4, "samples": 50}"#).unwrap();
    let out = dir.path().join("r.json");
    let o = homsol(&["classify", "--config", cfg.to_str().unwrap(), "--d", "3", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&out);
    assert_eq!(r["config"]["d"], 3.0);
    assert_eq!(r["config"]["samples"], 50);
    assert_eq!(r["config"]["operator"], "linear:A=[[2,0],[0,1]]");
    assert_eq!(r["family"]["basis"].as_array().unwrap().len(), 2);
}

fn strip_out(mut r: Value) -> Value {
    r["config"]["out"] = Value::Null;
    r
}

/// Rerunning a report from its embedded config, with a different thread
/// count, reproduces every field bit for bit.
fn assert_rerun_identical(args: &[&str]) {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let mut full: Vec<&str> = args.to_vec();
    let first_str = first.to_str().unwrap().to_owned();
    full.extend(["--out", &first_str]);
    let o = homsol(&full, Some("1"));
    assert!(o.status.success(), "{}", stderr(&o));
    let o = homsol(
        &[args[0], "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()],
        Some("4"),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let a = strip_out(read_json(&first));
    let b = strip_out(read_json(&second));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn classify_rerun_is_bitwise_identical() {
    assert_rerun_identical(&["classify", "--op", "linear:A=[[2,1,0],[1,2,0],[0,0,1]]", "--n", "3", "--d", "3"]);
}

#[test]
fn verify_rerun_is_bitwise_identical() {
    assert_rerun_identical(&["verify", "--op", "perturbed:eps=0.2", "--n", "2", "--poly", "x1^3 - 3*x1*x2^2"]);
}

#[test]
fn spectrum_rerun_is_bitwise_identical() {
    assert_rerun_identical(&["spectrum", "--n", "3", "--grid", "12x24", "--k", "10"]);
}

#[test]
fn hunt_rerun_is_bitwise_identical() {
    assert_rerun_identical(&["hunt", "--op", "speclag:c=0", "--n", "2", "--d", "3", "--lmax", "3", "--seeds", "3", "--max-iters", "300"]);
}
