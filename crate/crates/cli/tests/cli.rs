use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_twosystem");

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const QUARTIC: &str = r#"
[model]
builtin = "quartic(0.1)"

[initial]
x = [1.0, 0.0]
m_upper = [1.0, 0.0, 1.0]

[run]
form = "two"
compare_with = "bracket"

[integrator]
method = "dopri5"
rtol = 1e-10
atol = 1e-10
t_end = 10.0
sample_dt = 0.5
"#;

#[test]
fn simulate_writes_csv_and_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "quartic.toml", QUARTIC);
    let o = run(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("quartic.csv")).unwrap();
    assert!(csv.starts_with("t,q,p,M11,M12,M22\n"));
    assert_eq!(csv.lines().count(), 1 + 21);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("quartic.report.json")).unwrap()).unwrap();
    assert!(report["energy"]["max_drift"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["casimir_0"]["values"].as_array().unwrap().len(), 21);
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "q.toml", QUARTIC);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    }
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn zero_horizon_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "z.toml", &QUARTIC.replace("t_end = 10.0", "t_end = 0.0"));
    assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap()])), 0);
    assert_eq!(fs::read_to_string(dir.path().join("z.csv")).unwrap().lines().count(), 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let asym = write(
        dir.path(),
        "asym.toml",
        &QUARTIC.replace("m_upper = [1.0, 0.0, 1.0]", "m = [[1.0, 2.0], [0.0, 1.0]]"),
    );
    let o = run(&["simulate", asym.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("symmetric"), "{}", stderr(&o));

    assert_eq!(code(&run(&["simulate", dir.path().join("missing.toml").to_str().unwrap()])), 2);
    let bad = write(dir.path(), "bad.toml", "[model\nbuiltin = 1");
    assert_eq!(code(&run(&["simulate", bad.to_str().unwrap()])), 2);
}

#[test]
fn blow_up_exits_3() {
    let dir = TempDir::new().unwrap();
    // H = −q²p: q̇ = −q² blows up at t = 1 from q = −1
    write(dir.path(), "blow.poly", "-1 2 1\n");
    let cfg = write(
        dir.path(),
        "blow.toml",
        r#"
[model]
polynomial_file = "blow.poly"
[initial]
x = [-1.0, 0.0]
[run]
form = "base"
[integrator]
method = "dopri5"
rtol = 1e-8
atol = 1e-8
t_end = 2.0
"#,
    );
    let o = run(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn compare_forms() {
    let dir = TempDir::new().unwrap();
    let two_bracket = write(dir.path(), "tb.toml", QUARTIC);
    let o = run(&["compare", two_bracket.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));

    let multi = QUARTIC
        .replace("m_upper = [1.0, 0.0, 1.0]", "m_upper = [1.0, 0.0, -1.0]")
        .replace("compare_with = \"bracket\"", "compare_with = \"multivector\"")
        .replace("rtol = 1e-10\natol = 1e-10", "rtol = 1e-12\natol = 1e-12");
    let o = run(&["compare", write(dir.path(), "tm.toml", &multi).to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));

    let vector = QUARTIC
        .replace("m_upper = [1.0, 0.0, 1.0]", "ys = [[0.6, -0.4]]")
        .replace("compare_with = \"bracket\"", "compare_with = \"vector\"")
        .replace("rtol = 1e-10\natol = 1e-10", "rtol = 1e-12\natol = 1e-12");
    let o = run(&["compare", write(dir.path(), "tv.toml", &vector).to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));

    let bad = QUARTIC.replace("compare_with = \"bracket\"", "compare_with = \"variational\"");
    assert_eq!(code(&run(&["compare", write(dir.path(), "bad.toml", &bad).to_str().unwrap()])), 2);
}

fn oracle_config(model: &str, x: &str, m: &str, case: &str) -> String {
    format!(
        r#"
[model]
builtin = "{model}"
[initial]
x = {x}
m_upper = {m}
[integrator]
method = "dopri5"
rtol = 1e-12
atol = 1e-12
t_end = 10.0
[oracle]
case = "{case}"
"#
    )
}

#[test]
fn oracle_cases() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("harmonic", "[1.0, 0.0]", "[4.0, 0.0, 1.0]", "quadratic", 0),
        ("quartic(0.1)", "[1.0, 0.0]", "[0.0, 0.0, 0.0]", "zero-phi", 0),
        ("quartic(0.1)", "[0.0, 0.0]", "[2.0, 0.3, 1.0]", "stationary", 0),
        ("quartic(0.1)", "[1.0, 0.0]", "[2.0, 0.3, 1.0]", "stationary", 4),
        ("quartic(0.1)", "[1.0, 0.0]", "[2.0, 0.3, 1.0]", "quadratic", 4),
    ];
    for (k, (model, x, m, case, expected)) in cases.into_iter().enumerate() {
        let p = write(dir.path(), &format!("o{k}.toml"), &oracle_config(model, x, m, case));
        let o = run(&["oracle", p.to_str().unwrap()]);
        assert_eq!(code(&o), expected, "{case}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn action_angle_oracle_reports_both_checks() {
    let dir = TempDir::new().unwrap();
    let text = oracle_config("harmonic", "[0.0, 1.0]", "[0.0, 0.0, 0.0]", "action-angle")
        + "action_coeffs = [0.0, 0.0, 0.5]\naction_state = [1.0, 0.0, 1.0, 1.0, 0.0]\n";
    let o = run(&["oracle", write(dir.path(), "aa.toml", &text).to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("max residual"));
    assert!(s.contains("observed β behaviour: linear"), "{s}");
}

#[test]
fn example_quartic_and_invariants() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ex");
    let o = run(&["example-quartic", "--t-end", "20", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("quartic.csv").exists());

    let cfg = write(dir.path(), "q.toml", QUARTIC);
    let report = dir.path().join("again.json");
    let o = run(&[
        "invariants",
        cfg.to_str().unwrap(),
        out.join("quartic.csv").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("quartic.report.json")).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(a["casimir_0"]["values"], b["casimir_0"]["values"]);

    let o = run(&["example-quartic", "--epsilon", "0", "--t-end", "5", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}
