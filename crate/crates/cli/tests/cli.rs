use std::process::{Command, Output};

fn oseen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oseen")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spectrum_at_rest_gives_second_ground_state() {
    let out = oseen(&["spectrum", "--alpha", "0", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,k,n,r_max,quantity,value,lambda_star,converged,elapsed_ms"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[4], "sigma");
    assert_eq!(row[6], "");
    assert_eq!(row[8], "0");
    let value: f64 = row[5].parse().unwrap();
    assert!((value - 1.0).abs() < 2e-3);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["pseudo", "--alpha", "2513.27", "--k", "1", "--n", "400", "--rmax", "20"];
    assert_eq!(oseen(&args).stdout, oseen(&args).stdout);
}

#[test]
fn json_meta_echoes_beta() {
    let out = oseen(&["spectrum", "--alpha", "251.327412", "--k", "1", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let beta = doc["meta"]["beta_k"][0].as_f64().unwrap();
    assert!((beta - 10.0).abs() < 1e-6);
    assert!(doc["meta"]["version"].is_string());
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(oseen(&["spectrum", "--alpha", "1", "--k", "1", "--bogus"]).status.code(), Some(2));
    assert_eq!(oseen(&["spectrum", "--alpha", "1", "--k", "0"]).status.code(), Some(2));
    assert_eq!(oseen(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(
        oseen(&["sweep", "--alphas", "5,5,5,5", "--k", "1", "--quantity", "sigma", "--fit"]).status.code(),
        Some(1)
    );
}

#[test]
fn wave_suite_passes() {
    let out = oseen(&["verify", "--suite", "wave"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("true")));
}

#[test]
fn quasimode_reports_scaled_ratio() {
    let out = oseen(&["quasimode", "--alpha", "25132.7412"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains(",quasimode_ratio,"));
    assert!(text.contains(",quasimode_ratio_scaled,"));
}
