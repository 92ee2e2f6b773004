use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qradar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qradar")).args(args).output().expect("spawn qradar")
}

fn rows(csv_text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv_text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let body = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, body)
}

fn col(header: &[String], body: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    body.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = qradar(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn bounds_at_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["bounds", "--out", dir.path().to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2.4677e-5") && text.contains("G_opt  = 1.0172"), "{text}");
    let s = summary(dir.path());
    let r = &s["results"];
    assert!((r["e_cl"].as_f64().unwrap() - 2.46773e-5).abs() < 1e-10);
    assert!((r["e_pair"].as_f64().unwrap() - 4.93546e-5).abs() < 1e-10);
    assert!((r["e_max"].as_f64().unwrap() - 9.87093e-5).abs() < 1e-10);
    assert_eq!(s["config"]["radar"]["n_noise"], 10.8);
}

#[test]
fn zero_reflectivity_zeroes_bounds() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["bounds", "--kappa", "0", "--out", dir.path().to_str().unwrap()]);
    let r = &summary(dir.path())["results"];
    for k in ["e_cl", "e_pair", "e_max"] {
        assert_eq!(r[k].as_f64().unwrap(), 0.0, "{k}");
    }
}

#[test]
fn missing_noise_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, "{\n  \"radar\": {\n    \"n_signal\": 0.0353,\n    \"kappa_yes\": 0.0302\n  }\n}\n").unwrap();
    let out = qradar(&["bounds", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("n_noise") && err.contains("line"), "{err}");
}

#[test]
fn out_of_range_value_names_field() {
    let out = qradar(&["bounds", "--kappa", "1.5", "--out", "/nonexistent/never"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("radar.kappa_yes"));
}

#[test]
fn flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"radar": {"n_signal": 0.0353, "n_noise": 10.8, "kappa_yes": 0.0302}, "seed": 4}"#).unwrap();
    run_ok(&["bounds", "--config", cfg.to_str().unwrap(), "--n-noise", "21.6", "--out", dir.path().to_str().unwrap()]);
    let s = summary(dir.path());
    assert_eq!(s["config"]["radar"]["n_noise"], 21.6);
    assert_eq!(s["config"]["seed"], 4);
    assert!((s["results"]["e_cl"].as_f64().unwrap() - 2.46773e-5 / 2.0).abs() < 1e-10);
}

#[test]
fn fig3_peaks_and_beats_classical() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["fig3", "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    let (h, b) = rows(&fs::read_to_string(dir.path().join("result.csv")).unwrap());
    let g = col(&h, &b, "g_rx");
    assert_eq!(g.len(), 10);
    let e_ideal = col(&h, &b, "e_ideal");
    let e_mc = col(&h, &b, "e_mc");
    let e_cl = col(&h, &b, "e_cl")[0];
    // the ideal-counting curve turns over between 1.015 and 1.020
    let imax = (0..g.len()).max_by(|&i, &j| e_ideal[i].total_cmp(&e_ideal[j])).unwrap();
    assert!((1.015..=1.020).contains(&g[imax]), "peak at {}", g[imax]);
    let g_opt = summary(dir.path())["results"]["g_opt_ideal"].as_f64().unwrap();
    assert!((1.016..=1.018).contains(&g_opt));
    assert!(e_mc.iter().cloned().fold(f64::MIN, f64::max) > e_cl);
}

#[test]
fn fig3_unit_gain_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["fig3", "--gains", "1.0", "--trials", "100000", "--out", dir.path().to_str().unwrap()]);
    let (h, b) = rows(&fs::read_to_string(dir.path().join("result.csv")).unwrap());
    assert_eq!(b.len(), 1);
    assert_eq!(col(&h, &b, "e_model")[0], 0.0);
    assert_eq!(col(&h, &b, "e_ideal")[0], 0.0);
}

#[test]
fn fig3_bytes_do_not_depend_on_run_or_threads() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let common = ["fig3", "--seed", "7", "--trials", "1000000"];
    for (d, threads) in dirs.iter().zip(["1", "1", "3"]) {
        let mut args = common.to_vec();
        args.extend(["--threads", threads, "--out", d.path().to_str().unwrap()]);
        run_ok(&args);
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("result.csv")).unwrap();
    assert_eq!(read(&dirs[0]), read(&dirs[1]));
    assert_eq!(read(&dirs[0]), read(&dirs[2]));
}

#[test]
fn fig4_curves() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["fig4", "--out", dir.path().to_str().unwrap()]);
    let (h, b) = rows(&fs::read_to_string(dir.path().join("result.csv")).unwrap());
    let nth = col(&h, &b, "nth_signal");
    let q = col(&h, &b, "q_model");
    let (pure, dirty): (Vec<usize>, Vec<usize>) = (0..nth.len()).partition(|&i| nth[i] == 0.0);
    assert_eq!((pure.len(), dirty.len()), (30, 30));
    for (&i, &j) in pure.iter().zip(&dirty) {
        assert!(q[i] > q[j]);
    }
    // Q grows towards small signal for the pure probe
    assert!(q[pure[0]] > q[pure[29]]);
    assert!(q[dirty[0]] < 1.0);
    let s = summary(dir.path());
    let point = &s["results"]["configured_point"];
    assert_eq!(point["kind"], "model");
    assert!((1.2..1.3).contains(&point["q"].as_f64().unwrap()));
}

#[test]
fn simulate_writes_tallies_and_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("toy.json");
    fs::write(
        &cfg,
        r#"{"radar": {"n_signal": 0.5, "n_noise": 1.0, "kappa_yes": 0.5, "g_rx": 2.0},
            "trials": {"m_trials": 200000},
            "nu": [0, 1, 0, 2],
            "scaling": {"m_list": [4, 8], "reps": 2000}}"#,
    )
    .unwrap();
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let (h, b) = rows(&fs::read_to_string(dir.path().join("result.csv")).unwrap());
    assert_eq!(h, ["outcome", "count_yes", "count_no", "p_yes", "p_no", "p_model_yes", "p_model_no", "nu"]);
    assert_eq!(b.len(), 4);
    let total: f64 = col(&h, &b, "count_yes").iter().sum();
    assert_eq!(total, 200000.0);
    let (h, b) = rows(&fs::read_to_string(dir.path().join("scaling.csv")).unwrap());
    assert_eq!(col(&h, &b, "m"), vec![4.0, 8.0]);
    let p = col(&h, &b, "p_error");
    assert!(p[1] < p[0] && p[0] < 0.5);
}

#[test]
fn calibrate_recovers_reference_values() {
    for (kind, truth) in [("ramsey", 0.104), ("relaxation", 8.6), ("cosine", -1.898), ("kappa", 3.02e-2)] {
        let dir = tempfile::tempdir().unwrap();
        run_ok(&["calibrate", "--kind", kind, "--seed", "3", "--out", dir.path().to_str().unwrap()]);
        let r = summary(dir.path())["results"].clone();
        assert_eq!(r["truth"].as_f64().unwrap(), truth);
        let z = r["z"].as_f64().unwrap();
        assert!(z.abs() < 4.0, "{kind}: z = {z}");
        let (h, b) = rows(&fs::read_to_string(dir.path().join("result.csv")).unwrap());
        assert!(!b.is_empty());
        if kind == "kappa" {
            assert_eq!(h, ["x", "y", "w_reference", "w_reflected", "in_window"]);
        } else {
            assert_eq!(&h[1..], ["value", "sigma", "fitted"]);
        }
    }
}

#[test]
fn calibrate_failure_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"radar": {"n_signal": 0.0353, "n_noise": 10.8, "kappa_yes": 0.0302},
            "calibration": {"kind": "cosine", "synth": {"cosine_points": 2}}}"#,
    )
    .unwrap();
    let out = qradar(&["calibrate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = qradar(&["calibrate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
