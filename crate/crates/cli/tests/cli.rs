use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cqed_core::dynamics::{DecayKind, DecayTrace};
use cqed_core::io::{decay_csv, parse_series, Series};

fn cqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqed")).args(args).output().expect("spawn cqed")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn row(report: &str, name: &str) -> (f64, f64) {
    let line = report
        .lines()
        .find(|l| l.split_whitespace().next() == Some(name))
        .unwrap_or_else(|| panic!("no row {name} in\n{report}"));
    let cols: Vec<f64> = line.split_whitespace().skip(1).take(2).map(|v| v.parse().unwrap()).collect();
    (cols[0], cols[1])
}

#[test]
fn derive_reports_the_headline_numbers() {
    let o = cqed(&["derive", "--config", &cfg("derive.cfg")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout(&o);
    let (c, _) = row(&r, "cooperativity");
    assert!((c - 1.42).abs() < 0.01, "C = {c}");
    let (b, _) = row(&r, "beta");
    assert!((100.0 * b - 89.5).abs() < 0.5, "beta = {b}");
    let (f, fs) = row(&r, "f_min");
    assert!((f - 26.15).abs() < 0.01 && (fs - 1.85).abs() < 0.01, "F_min = {f} +- {fs}");
    assert_eq!(row(&r, "n_strong").0, 7.0);
    assert_eq!(row(&r, "improved_n_strong").0, 1.0);
}

#[test]
fn derive_csv_has_a_header() {
    let o = cqed(&["derive", "--format", "csv", "--set", "tau_on=0.2", "--set", "tau_off=2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("quantity,value,sigma,unit\nbeta,9.0"), "{text}");
}

#[test]
fn empty_cavity_spectrum_dips_at_resonance() {
    let o = cqed(&[
        "spectrum",
        "--set",
        "g=0",
        "--set",
        "kappa=49.7",
        "--set",
        "gamma=1.36",
        "--set",
        "delta_c=7",
        "--set",
        "freq_min=-100",
        "--set",
        "freq_max=100",
        "--set",
        "points=401",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let Series::Spectrum(s) = parse_series(&stdout(&o), Path::new("stdout")).unwrap() else {
        panic!("not a spectrum")
    };
    assert_eq!(s.argmin(), 7.0);
}

#[test]
fn noiseless_decay_fit_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let trace = DecayTrace::new(
        0.0,
        0.005,
        (0..400).map(|k| 1e4 * (-(k as f64) * 0.005 / 0.194).exp()).collect(),
        DecayKind::Population,
    )
    .unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, decay_csv(&trace)).unwrap();
    let o = cqed(&["fit", "--model", "exp_decay", "--data", data.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (tau, _) = row(&stdout(&o), "tau");
    assert!((tau - 0.194).abs() < 1e-6, "tau = {tau}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o =
            cqed(&["decay", "--config", &cfg("decay.cfg"), "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "11");
    let b = run("b.csv", "11");
    let c = run("c.csv", "12");
    assert_eq!(a, b);
    assert_ne!(a, c);

    let t1 = stdout(&cqed(&["tuning-map", "--config", &cfg("tuning_map.cfg")]));
    let t2 = stdout(&cqed(&["tuning-map", "--config", &cfg("tuning_map.cfg")]));
    assert_eq!(t1, t2);
}

#[test]
fn flags_override_the_config_file() {
    let base = stdout(&cqed(&["derive", "--config", &cfg("derive.cfg")]));
    let over = stdout(&cqed(&["derive", "--config", &cfg("derive.cfg"), "--set", "kappa=24.85 +- 1"]));
    assert_eq!(row(&base, "n_strong").0, 7.0);
    assert!(row(&over, "n_strong").0 < 7.0);
}

#[test]
fn invalid_input_exits_2() {
    let o =
        cqed(&["spectrum", "--set", "g=1", "--set", "kappa=10", "--set", "gamma=1", "--set", "colour=red"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'colour'"));

    let o = cqed(&["fit", "--model", "exp_decay", "--data", "/nonexistent/d.csv"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "time_ns,value\n0,1\n0.1,oops\n").unwrap();
    let o = cqed(&["fit", "--model", "exp_decay", "--data", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("bad.csv:3:"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let o = cqed(&["fit", "--model", "gaussian", "--data", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.csv");
    let o = cqed(&["spectrum", "--config", &cfg("spectrum.cfg"), "--out", spec.to_str().unwrap()]);
    assert!(o.status.success());
    let o = cqed(&["fit", "--model", "lorentzian", "--data", spec.to_str().unwrap(), "--set", "max_iter=1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solver_failure_exits_4() {
    let o = cqed(&["g2", "--set", "g=1", "--set", "kappa=20", "--set", "gamma=0.2", "--set", "omega=1e-12"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn version_names_the_file_format() {
    let o = cqed(&["--version"]);
    assert!(stdout(&o).contains(&format!("file format {}", cqed_core::FORMAT_VERSION)));
}

#[test]
fn every_example_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let streak = cfg("data/streak.txt");
    let jobs: Vec<Vec<String>> = vec![
        vec!["derive".into(), "--config".into(), cfg("derive.cfg")],
        vec!["spectrum".into(), "--config".into(), cfg("spectrum.cfg"), "--out".into(), out("s.csv")],
        vec!["spectrum".into(), "--config".into(), cfg("spectrum_master.cfg")],
        vec!["decay".into(), "--config".into(), cfg("decay.cfg"), "--out".into(), out("d.csv")],
        vec!["tuning-map".into(), "--config".into(), cfg("tuning_map.cfg")],
        vec!["g2".into(), "--config".into(), cfg("g2.cfg")],
        vec![
            "fit".into(),
            "--model".into(),
            "exp_decay".into(),
            "--data".into(),
            out("d.csv"),
            "--config".into(),
            cfg("fit_exp_decay.cfg"),
        ],
        vec![
            "fit".into(),
            "--model".into(),
            "dit".into(),
            "--data".into(),
            out("s.csv"),
            "--set".into(),
            "gamma=1.36".into(),
        ],
        vec![
            "fit".into(),
            "--model".into(),
            "power_broadening".into(),
            "--config".into(),
            cfg("fit_power.cfg"),
        ],
        vec![
            "streak-bin".into(),
            "--data".into(),
            streak,
            "--config".into(),
            cfg("streak.cfg"),
            "--out".into(),
            out("b.csv"),
        ],
        vec![
            "fit".into(),
            "--model".into(),
            "exp_decay".into(),
            "--data".into(),
            out("b.csv"),
            "--set".into(),
            "weights=poisson".into(),
        ],
    ];
    for job in jobs {
        let args: Vec<&str> = job.iter().map(String::as_str).collect();
        let start = std::time::Instant::now();
        let o = cqed(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(start.elapsed().as_secs_f64() < 10.0, "{args:?} took {:?}", start.elapsed());
    }
}
