use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn betawalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betawalk")).args(args).output().expect("binary runs")
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).to_string_lossy().into_owned()
}

#[test]
fn rate_table_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rate.csv");
    let o = out.to_str().unwrap();
    let r = betawalk(&["rate", "--alpha", "1", "--beta", "1", "--out", o]);
    assert_eq!(r.status.code(), Some(0));
    let first = std::fs::read(&out).unwrap();
    let rows = csv_rows(std::str::from_utf8(&first).unwrap());
    assert_eq!(rows.len(), 9);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]), "x(θ) decreasing");
    let man: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("rate.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(man["command"], "rate");
    assert_eq!(betawalk(&["rate", "--alpha", "1", "--beta", "1", "--out", o]).status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn rate_rejects_theta_outside_range() {
    let r = betawalk(&["rate", "--alpha", "0.5", "--beta", "0.5", "--theta-grid", "0.6"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!r.stderr.is_empty());
}

#[test]
fn laplace_value_and_parity() {
    let r = betawalk(&["fredholm", "laplace", "--t", "8", "--x", "4", "--u", "-1,-5"]);
    assert_eq!(r.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(r.stdout).unwrap());
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|row| row[3] > 0.0 && row[3] < 1.0));
    assert!(rows[1][3] < rows[0][3]);
    let bad = betawalk(&["fredholm", "laplace", "--t", "8", "--x", "3", "--u", "-1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn gue_and_limit_agree() {
    let g = betawalk(&["fredholm", "gue", "--y-grid", "-4:2:0.5"]);
    assert_eq!(g.status.code(), Some(0));
    let gue = csv_rows(&String::from_utf8(g.stdout).unwrap());
    assert_eq!(gue.len(), 13);
    assert!(gue.windows(2).all(|w| w[1][1] >= w[0][1]));
    let l = betawalk(&["fredholm", "limit", "--y-grid", "-2:2:2"]);
    assert_eq!(l.status.code(), Some(0));
    let lim = csv_rows(&String::from_utf8(l.stdout).unwrap());
    for row in &lim {
        let g = gue.iter().find(|r| (r[0] - row[0]).abs() < 1e-12).unwrap();
        assert!((g[1] - row[2]).abs() < 1e-6, "y={}", row[0]);
    }
}

#[test]
fn verify_steep_pass_and_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("steep.json");
    let small = ["verify", "steep", "--thetas", "0.1:0.3:0.1", "--alphas", "1,2", "--betas", "1", "--k-max", "2"];
    let mut args = small.to_vec();
    args.extend(["--json", json.to_str().unwrap()]);
    let r = betawalk(&args);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(rep["pass"], true);
    let suites = rep["suites"].as_array().unwrap();
    assert!(suites.iter().all(|s| s["min_margin"].as_f64().unwrap() > 0.0));
    let mut args = small.to_vec();
    args.extend(["--perturb-h-prime", "3"]);
    let r = betawalk(&args);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8(r.stdout).unwrap().contains("FAIL"));
}

#[test]
fn verify_polygamma_and_moments_pass() {
    assert_eq!(betawalk(&["verify", "polygamma"]).status.code(), Some(0));
    assert_eq!(betawalk(&["verify", "moments", "--r", "0.5,0.9"]).status.code(), Some(0));
}

#[test]
fn smoke_experiment_is_fast_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let r = betawalk(&["experiment", "--config", &config_path("smoke_fixed.json"), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(start.elapsed() < Duration::from_secs(60));
    let samples = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(samples.lines().next().unwrap(), "t,sample_index,seed,x_target,log_tail_prob,x_t_statistic");
    assert_eq!(samples.lines().count(), 51);
    let ks = csv_rows(&std::fs::read_to_string(dir.path().join("ks.csv")).unwrap());
    assert!(ks[0][2] >= 0.0 && ks[0][2] <= 1.0);
}

#[test]
fn power_and_dirichlet_experiments_record_flags() {
    for (cfg, env) in [("power_r03.json", None), ("dirichlet_r06.json", Some("dirichlet2d"))] {
        let dir = tempfile::tempdir().unwrap();
        let r = betawalk(&["experiment", "--config", &config_path(cfg), "--out-dir", dir.path().to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(0), "{cfg}: {}", String::from_utf8_lossy(&r.stderr));
        let man: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(man["schedule_flags"]["gcond_ok"], true);
        assert_eq!(man["schedule_flags"]["as1_ok"], true);
        if let Some(e) = env {
            assert_eq!(man["config"]["env"], e);
        }
        assert!(man["schedule"].as_array().unwrap().iter().all(|s| s["sigma_t"].as_f64().unwrap() > 0.0));
    }
}

#[test]
fn config_schema_violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"schedule": {"mode": "fixed", "alpha": 1, "beta": 1}, "theta": 0.3, "t_list": [64], "n_samples": 50, "master_seed": 1, "bogus": 1}"#,
        r#"{"schedule": {"mode": "fixed", "alpha": 1, "beta": 1}, "theta": 0.3, "t_list": [64], "n_samples": 10, "master_seed": 1}"#,
        r#"{"schedule": {"mode": "power", "r": 0.7, "s": 0.3, "c1": 1, "c2": 1}, "theta": 0.3, "t_list": [64], "n_samples": 50, "master_seed": 1}"#,
        r#"{"schedule": {"mode": "fixed", "alpha": 1}, "theta": 0.3}"#,
    ];
    for (i, body) in cases.iter().enumerate() {
        let p = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&p, body).unwrap();
        let r = betawalk(&["experiment", "--config", p.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(2), "case {i}");
    }
}

#[test]
fn experiment_output_independent_of_threads() {
    let base = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let d = base.path().join(threads);
        let r = betawalk(&["--threads", threads, "experiment", "--config", &config_path("smoke_fixed.json"), "--out-dir", d.to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(0));
        outputs.push((std::fs::read(d.join("samples.csv")).unwrap(), std::fs::read(d.join("ks.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn library_entry_point_matches_binary_codes() {
    assert_eq!(betawalk::cli::run(["betawalk", "--help"]), 0);
    assert_eq!(betawalk::cli::run(["betawalk", "fredholm"]), 2);
    assert_eq!(betawalk::cli::run(["betawalk", "rate", "--alpha", "-1", "--beta", "1"]), 2);
}
