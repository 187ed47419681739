use std::process::{Command, Output};

fn shu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn eval_json(args: &[&str]) -> serde_json::Value {
    let mut full = vec!["eval"];
    full.extend_from_slice(args);
    full.push("--json");
    let o = shu(&full);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn eval_prints_value_estimate_method_and_work() {
    let o = shu(&["eval", "--nu", "0", "--z", "3", "--t", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for key in ["value=", "error_estimate=", "method=", "work="] {
        assert!(out.contains(key), "{out}");
    }
    let v: f64 = out
        .split_whitespace()
        .find_map(|w| w.strip_prefix("value="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - 0.031180758184859766).abs() < 1e-12);
}

#[test]
fn eval_json_has_the_four_keys() {
    let j = eval_json(&["--nu", "1.5", "--z", "2", "--t", "0.4"]);
    let obj = j.as_object().unwrap();
    let mut keys: Vec<_> = obj.keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["error_estimate", "method", "value", "work"]);
    assert!(obj["value"].as_f64().unwrap() > 0.0);
    assert!(obj["method"].is_string());
}

#[test]
fn forced_methods_agree_with_auto() {
    let auto = eval_json(&["--nu", "1", "--z", "4", "--t", "0.5"])["value"].as_f64().unwrap();
    for m in ["oracle", "small-t"] {
        let v = eval_json(&["--nu", "1", "--z", "4", "--t", "0.5", "--method", m])["value"]
            .as_f64()
            .unwrap();
        assert!((v - auto).abs() <= 1e-10 * auto, "{m}: {v} vs {auto}");
    }
    let small_z = eval_json(&["--nu", "0.3", "--z", "0.2", "--t", "2", "--method", "small-z"]);
    let oracle = eval_json(&["--nu", "0.3", "--z", "0.2", "--t", "2", "--method", "oracle"]);
    let (a, b) = (small_z["value"].as_f64().unwrap(), oracle["value"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-10 * b);
}

#[test]
fn large_t_matches_kfun() {
    let s = eval_json(&["--nu", "0", "--z", "3", "--t", "1e6"])["value"].as_f64().unwrap();
    let o = shu(&["kfun", "--nu", "0", "--z", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let k: f64 = stdout(&o).trim().parse().unwrap();
    assert!((s - k).abs() <= 1e-12 * k, "{s} vs {k}");
}

#[test]
fn negative_order_is_accepted() {
    let neg = eval_json(&["--nu", "-2", "--z", "1", "--t", "1"]);
    assert!(neg["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn domain_errors_name_the_flag_and_exit_2() {
    for (args, flag) in [
        (vec!["eval", "--nu", "1", "--z", "-2", "--t", "1"], "--z"),
        (vec!["eval", "--nu", "1", "--z", "2", "--t", "0"], "--t"),
        (vec!["eval", "--nu", "1", "--z", "2", "--t", "1", "--tol", "-1"], "--tol"),
        (vec!["kfun", "--nu", "1", "--z", "0"], "--z"),
    ] {
        let o = shu(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(flag), "{}", stderr(&o));
    }
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(shu(&["eval", "--nu", "1", "--z", "x", "--t", "1"]).status.code(), Some(1));
    assert_eq!(shu(&["eval", "--nu", "1"]).status.code(), Some(1));
    assert_eq!(shu(&["bogus"]).status.code(), Some(1));
    assert_eq!(shu(&["--help"]).status.code(), Some(0));
}

#[test]
fn figure_writes_csv_and_rejects_bad_id() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.csv");
    let o = shu(&["figure", "--id", "3", "--out", path.to_str().unwrap(), "--points", "7", "--orders", "0,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,S_n0,approx_n0,S_n2,approx_n2");
    assert_eq!(lines.count(), 7);

    let o = shu(&["figure", "--id", "9", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--id"));
}

#[test]
fn table_reproduces_eval_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = shu(&[
        "table", "--nu-list", "0.5", "--z-list", "2.5", "--t-list", "1.7", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&path).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let table_value: f64 = row[3].parse().unwrap();
    let e = eval_json(&["--nu", "0.5", "--z", "2.5", "--t", "1.7"]);
    assert_eq!(table_value.to_bits(), e["value"].as_f64().unwrap().to_bits());
    assert_eq!(row[5], e["method"].as_str().unwrap());
}

#[test]
fn table_marks_bad_cells_and_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = shu(&[
        "table", "--nu-list", "0,1", "--z-list", "-1,2", "--t-list", "0.5,3", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "nu,z,t,value,error_estimate,method");
    assert_eq!(lines.len(), 9);
    // t varies fastest, then z, then nu.
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!((first[3], first[4], first[5]), ("", "", "error:domain"));
    let t_second: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(t_second, 3.0);
    let nu_last: f64 = lines[8].split(',').next().unwrap().parse().unwrap();
    assert_eq!(nu_last, 1.0);
}

#[test]
fn verify_default_passes_and_json_has_records() {
    let o = shu(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));

    let o = shu(&["verify", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let recs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let recs = recs.as_array().unwrap();
    assert!(!recs.is_empty());
    for key in ["identity", "nu", "z", "t", "residual", "scale", "pass"] {
        assert!(recs[0].get(key).is_some(), "missing {key}");
    }
}
