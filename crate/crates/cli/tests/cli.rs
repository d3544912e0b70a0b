use std::process::{Command, Output};

fn rfim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfim")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exact_single_site() {
    let out = rfim(&["exact", "--region", "square:1", "--v", "1e-300", "--beta", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["free_energy"].as_f64().unwrap() - 4.000335406372896).abs() < 1e-9);
    assert!((v["magnetization"][0].as_f64().unwrap() - 4f64.tanh()).abs() < 1e-9);
}

#[test]
fn exact_engines_agree() {
    let a = json(&rfim(&["exact", "--region", "square:3", "--seed", "4", "--engine", "enumeration"]));
    let b = json(&rfim(&["exact", "--region", "square:3", "--seed", "4", "--engine", "transfer-matrix"]));
    assert_eq!(a["engine"], "enumeration");
    assert_eq!(b["engine"], "transfer_matrix");
    assert!((a["free_energy"].as_f64().unwrap() - b["free_energy"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn ground_state_has_no_free_energy() {
    let v = json(&rfim(&["exact", "--region", "square:2", "--beta", "inf", "--boundary", "minus"]));
    assert!(v["free_energy"].is_null());
    assert_eq!(v["beta"], "inf");
}

#[test]
fn mc_is_reproducible() {
    let args = ["mc", "--region", "square:3", "--beta", "0.5", "--replicas", "300", "--seed", "9"];
    let a = rfim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, rfim(&args).stdout);
    assert_eq!(json(&a)["magnetization"].as_array().unwrap().len(), 9);
}

#[test]
fn verify_reports_and_exit_code() {
    let out = rfim(&["verify", "partition"]);
    assert!(out.status.success());
    let reports = json(&out);
    assert!(reports.as_array().unwrap().iter().all(|r| r["pass"] == true));
    let bad = rfim(&["verify", "bogus"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("decoupling"));
}

#[test]
fn sweep_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small sweep\nn_list = 3, 5\nbeta = 0, 1\nreplicas = 20\nseed = 3\nengine = exact\nsvg = true\nout_dir = res\n").unwrap();
    let out = rfim(&["sweep", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/decay.csv")).unwrap();
    assert!(csv.starts_with("n,beta,v,replicas,gap_mean,gap_se,engine,seconds\n3,0,1,20,0,0,transfer_matrix,0\n"));
    assert!(dir.path().join("res/decay.svg").exists());
    let first = std::fs::read(dir.path().join("res/decay.json")).unwrap();
    assert!(rfim(&["sweep", cfg.to_str().unwrap()]).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("res/decay.json")).unwrap());
}

#[test]
fn sweep_with_failing_rows_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.cfg");
    std::fs::write(&cfg, "n_list = 3, 20\nbeta = 1\nreplicas = 2\nengine = exact\n").unwrap();
    let out = rfim(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("out/decay.csv")).unwrap();
    assert!(csv.contains("20,1,1,2,,,error,0"));
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n_list = 2\n").unwrap();
    assert_eq!(rfim(&["sweep", cfg.to_str().unwrap()]).status.code(), Some(2));
}
