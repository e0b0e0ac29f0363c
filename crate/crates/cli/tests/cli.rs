use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qtrade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtrade"))
        .args(args)
        .env_remove("QTRADE_SEED")
        .output()
        .expect("spawn qtrade")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(2)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qtrade-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn classify_outside_point() {
    let out = qtrade(&["tradeoff", "classify", "--d", "2", "--ft", "0.95", "--fe", "0.95"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["class"], "outside");
}

#[test]
fn classify_boundary_and_interior() {
    let out = qtrade(&["tradeoff", "classify", "--d", "2", "--ft", "1", "--fe", "0.5"]);
    assert_eq!(json(&out)["class"], "boundary");
    let out = qtrade(&["tradeoff", "classify", "--d", "2", "--ft", "0.75", "--fe", "0.5"]);
    assert_eq!(json(&out)["class"], "region2-interior");
}

#[test]
fn transmit_table_starts_at_no_transmission() {
    let out = qtrade(&["apps", "transmit", "--points", "11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "p,alpha_star,f_cl,f_dir,f_qm");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 11);
    let first = &rows[0];
    assert!((first[2] - 2.0 / 3.0).abs() < 1e-12);
    assert!((first[3] - 0.5).abs() < 1e-12);
    assert!((first[4] - 2.0 / 3.0).abs() < 1e-12);
    for r in &rows {
        assert!(r[4] >= r[2] - 1e-9 && r[2] >= r[3] - 1e-9);
    }
}

#[test]
fn cloner_table_has_both_branches() {
    let out = qtrade(&["apps", "cloner", "--points", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "alpha,branch,f_a,f_b");
    let body: Vec<_> = text.lines().skip(2).collect();
    assert_eq!(body.len(), 10);
    assert_eq!(body.iter().filter(|l| l.contains(",minus,")).count(), 5);
}

#[test]
fn tradeoff_curve_columns() {
    let out = qtrade(&["tradeoff", "curve", "--d", "3", "--points", "7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "alpha,f_t,f_e_max,f_e_min,on_boundary");
    let rows: Vec<_> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn channel_dump_qubit_isometry() {
    let out = qtrade(&["channel", "dump", "--d", "2", "--alpha", "0.5"]);
    assert!(out.status.success());
    let v = &json(&out)["isometry"];
    assert_eq!(v["rows"], 8);
    assert_eq!(v["cols"], 2);
    let re: Vec<f64> = v["re"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let s = 1.0 / 3f64.sqrt();
    let hi = 0.5 * (1.0 + s);
    let lo = 0.5 * (1.0 - s);
    let expected = [lo, 0.0, 0.0, -s, 0.0, 0.0, hi, 0.0, 0.0, hi, 0.0, 0.0, -s, 0.0, 0.0, lo];
    for (a, b) in re.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{re:?}");
    }
    assert!(v["im"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() == 0.0));
}

#[test]
fn channel_dump_csv() {
    let out = qtrade(&["channel", "dump", "--d", "3", "--alpha", "0.2", "--format", "csv", "--branch", "minus"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# d=3"));
    assert_eq!(text.lines().nth(1).unwrap(), "object,index,row,col,re,im");
    for object in ["superoperator", "isometry", "kraus"] {
        assert!(text.lines().any(|l| l.starts_with(object)), "{object}");
    }
}

#[test]
fn povm_check_optimal_qubit_seed() {
    let out = qtrade(&["povm", "check", "--d", "2", "--alpha", "0.5", "--c", "1.7320508075688772", "--e", "0", "--f", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&out);
    assert_eq!(j["seed_params"]["b"].as_f64().unwrap(), 3.0);
    assert_eq!(j["p0_psd"], true);
}

#[test]
fn povm_check_rejects_inadmissible_seed() {
    let out = qtrade(&["povm", "check", "--d", "2", "--alpha", "0.5", "--b", "1", "--c", "5", "--e", "1", "--f", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_haar_passes() {
    let out = qtrade(&["verify", "haar", "--d", "2", "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn invalid_arguments_exit_2() {
    for args in [
        &["verify", "haar", "--d", "9"][..],
        &["verify", "haar", "--d", "2", "--samples", "10"],
        &["tradeoff", "curve", "--d", "2", "--bogus"],
        &["report", "all", "--jobs", "0"],
        &["channel", "dump", "--d", "2", "--alpha", "1.5"],
    ] {
        assert_eq!(qtrade(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unknown_config_key_exits_2() {
    let cfg = temp_file("unknown.json", r#"{"sead": 3}"#);
    let out = qtrade(&["verify", "haar", "--d", "2", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tampered_tolerance_fails_with_exit_1() {
    let cfg = temp_file("tight.json", r#"{"samples": 1000, "tolerances": {"eig": 1e-20}}"#);
    let out = qtrade(&["verify", "fidelity", "--d", "2", "--trials", "200", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["verify", "haar", "--d", "3", "--samples", "2000", "--seed", "5"];
    let a = qtrade(&args);
    let b = qtrade(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut threaded = vec!["--jobs", "3"];
    threaded.extend(args);
    assert_eq!(a.stdout, qtrade(&threaded).stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qtrade"));
        cmd.args(["verify", "haar", "--d", "2", "--samples", "1000"]).args(extra);
        match env {
            Some(v) => cmd.env("QTRADE_SEED", v),
            None => cmd.env_remove("QTRADE_SEED"),
        };
        json(&cmd.output().unwrap())
    };
    assert_eq!(run(Some("11"), &[])["seed"], 11);
    assert_eq!(run(None, &[])["seed"], 7);
    assert_eq!(run(Some("11"), &["--seed", "4"])["seed"], 4);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("qtrade-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curve.csv");
    let out = qtrade(&["tradeoff", "curve", "--d", "2", "--points", "5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 7);
}
