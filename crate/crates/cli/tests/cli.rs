use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oseen-tp"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fundsol_eval_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let pts = configs().join("points_far.json");
    let params = configs().join("params.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["fundsol", "eval", "--kernel", "periodic", "--points", s(&pts), "--params", s(&params), "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("x1,x2,x3,t,g11,"));
    assert_eq!(lines.count(), 8 * 3);
}

#[test]
fn laplace_kernel_values() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.json");
    fs::write(&pts, r#"{"points": [[2.0, 0.0, 0.0]]}"#).unwrap();
    let out = dir.path().join("e.csv");
    let o = run(&["fundsol", "eval", "--kernel", "E", "--points", s(&pts), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    let v: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((v.abs() - 1.0 / (8.0 * std::f64::consts::PI)).abs() < 1e-15);
}

#[test]
fn oseen_kernel_requires_params() {
    let o = run(&["fundsol", "eval", "--kernel", "oseen", "--points", s(&configs().join("points_far.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"fft\": {\"n\": 64,}\n}").unwrap();
    let o = run(&["check", "fft", "--config", s(&bad), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:2:"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.json");
    let text = fs::read_to_string(configs().join("scenario_steady.json")).unwrap();
    fs::write(&sc, text.replacen("\"nu\"", "\"viscosity\": 1.0, \"nu\"", 1)).unwrap();
    let o = run(&["scenario", "eval", "--scenario", s(&sc), "--points", s(&configs().join("points_far.json"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_suites_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("check.json");
    let o = run(&["check", "residual", "--config", s(&cfg), "--out", s(dir.path()), "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rows = fs::read_to_string(dir.path().join("check_residual.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 5 * 20 * 2);
    let o = run(&["check", "fft", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&o), 0);
    let tight = dir.path().join("tight.json");
    fs::write(&tight, r#"{"fft": {"tol": 1e-9}}"#).unwrap();
    let o = run(&["check", "fft", "--config", s(&tight), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&o), 1);
    let o = run(&["check", "fft", "--threads", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn decay_fit_separates_flux_cases() {
    let dir = tempfile::tempdir().unwrap();
    let rays = configs().join("rays.json");
    let exponent = |scenario: &str, field: &str| -> f64 {
        let out = dir.path().join(format!("{scenario}.csv"));
        let o = run(&["decay", "fit", "--scenario", s(&configs().join(scenario)), "--rays", s(&rays), "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("field,ray,exponent,residual,n_samples\n"));
        let row = text
            .lines()
            .find(|l| l.starts_with(&format!("{field},transverse1,")))
            .unwrap();
        row.split(',').nth(2).unwrap().parse().unwrap()
    };
    assert!((exponent("scenario_flux_const.json", "v_perp") + 3.0).abs() < 0.2);
    assert!((exponent("scenario_flux_timedep.json", "v_perp") + 2.0).abs() < 0.15);
    assert!((exponent("scenario_flux_timedep.json", "p_perp") + 1.0).abs() < 0.15);
}

#[test]
fn repr_check_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("repr.csv");
    let o = run(&[
        "repr", "check",
        "--scenario", s(&configs().join("scenario_source.json")),
        "--mesh-level", "2",
        "--points", s(&configs().join("points_far.json")),
        "--out", s(&out),
        "--tol", "5e-2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("point,mode,|analytic|,|represented|,rel_err\n"));
    assert_eq!(text.lines().count(), 1 + 8 * 5);
    assert!(dir.path().join("repr_pressure.csv").exists());
    let o = run(&[
        "repr", "check",
        "--scenario", s(&configs().join("scenario_source.json")),
        "--mesh-level", "1",
        "--points", s(&configs().join("points_far.json")),
        "--out", s(&dir.path().join("coarse.csv")),
        "--tol", "1e-6",
    ]);
    assert_eq!(code(&o), 1);

    let fits = dir.path().join("fits.csv");
    let o = run(&[
        "decay", "fit",
        "--scenario", s(&configs().join("scenario_flux_timedep.json")),
        "--rays", s(&configs().join("rays.json")),
        "--out", s(&fits),
    ]);
    assert_eq!(code(&o), 0);
    let rep = dir.path().join("report");
    let samples = dir.path().join("fits_samples.csv");
    let o = run(&["report", "--inputs", s(&fits), s(&samples), s(&out), "--out", s(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let md = fs::read_to_string(rep.join("report.md")).unwrap();
    assert!(md.contains("periodic_velocity_decay"));
    assert!(md.contains("linear_representation"));
    let svg = fs::read_to_string(rep.join("decay_v_perp.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<circle"));
}
