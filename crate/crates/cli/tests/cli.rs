use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mlexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlexp"))
        .args(args)
        .output()
        .expect("run mlexp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn cdf_table_shape() {
    let o = mlexp(&["cdf", "--family", "logistic", "--n", "100", "--order", "5", "--grid", "-3:3:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 14);
    assert_eq!(lines[0], "x,value_order1,value_order2,value_order3,value_order4,value_order5,out_of_range_flag");
    assert!(lines.iter().all(|l| l.split(',').count() == 7));
    assert_eq!(lines[7], "0,0.5,0.5,0.5,0.5,0.5,0");
}

#[test]
fn exit_codes() {
    assert_eq!(mlexp(&["collapse-check"]).status.code(), Some(0));
    assert_eq!(mlexp(&["collapse-check", "--family", "logistic"]).status.code(), Some(1));
    assert_eq!(mlexp(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(mlexp(&["cdf", "--order", "6"]).status.code(), Some(2));
    assert_eq!(mlexp(&["moments", "--family", "weibull"]).status.code(), Some(2));
    assert_eq!(mlexp(&["moments", "--family", "student-t"]).status.code(), Some(2));
    assert_eq!(mlexp(&["quantile", "--grid", "0,0.5"]).status.code(), Some(2));
    assert_eq!(mlexp(&["mle"]).status.code(), Some(2));
    let o = mlexp(&["simulate", "--reps", "200"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--out-dir"));
}

#[test]
fn help_documents_flags() {
    let subcommands = [
        "moments",
        "cdf",
        "quantile",
        "mle",
        "simulate",
        "validate",
        "collapse-check",
        "compose-check",
    ];
    let top = stdout(&mlexp(&["--help"]));
    for s in subcommands {
        assert!(top.contains(s), "{s} missing from --help");
        let o = mlexp(&[s, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let h = stdout(&o);
        for flag in ["--family", "--param", "--precision", "--out-dir", "--manifest", "--workers"] {
            assert!(h.contains(flag), "{s} --help lacks {flag}");
        }
        assert!(h.contains("[default: 12]"), "{s} --help lacks precision default");
    }
    assert!(stdout(&mlexp(&["cdf", "--help"])).contains("--clamp-cdf"));
    assert!(stdout(&mlexp(&["simulate", "--help"])).contains("--reps"));
}

#[test]
fn precision_flag() {
    let short = stdout(&mlexp(&["quantile", "--family", "logistic", "--grid", "0.9", "--order", "1", "--precision", "4"]));
    assert_eq!(short.lines().nth(1), Some("0.9,1.282"));
    let long = stdout(&mlexp(&["quantile", "--family", "logistic", "--grid", "0.9", "--order", "1"]));
    assert_eq!(long.lines().nth(1), Some("0.9,1.28155156557"));
}

#[test]
fn clamped_cdf_stays_in_unit_interval() {
    let text = stdout(&mlexp(&["cdf", "--family", "student-t", "--param", "nu=5", "--n", "3", "--grid", "-6:6:0.25", "--clamp-cdf"]));
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        for v in &cols[1..6] {
            let v: f64 = v.parse().unwrap();
            assert!((0.0..=1.0).contains(&v), "{line}");
        }
    }
}

#[test]
fn mle_from_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    fs::write(&data, "1.0, 2.0\n4.5\n").unwrap();
    let o = mlexp(&["mle", "--family", "normal", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 3);
    assert!((v["theta_hat"].as_f64().unwrap() - 2.5).abs() < 1e-10);
    assert!(v["gradient_at_solution"].as_f64().unwrap().abs() <= 1e-10);
}

#[test]
fn moments_csv_and_json() {
    let csv = stdout(&mlexp(&["moments", "--family", "logistic"]));
    assert_eq!(csv.lines().next(), Some("name,value,est_error"));
    assert_eq!(csv.lines().count(), 1 + 1 + 6 + 9);
    let v: serde_json::Value = serde_json::from_str(&stdout(&mlexp(&["moments", "--family", "logistic", "--json"]))).unwrap();
    assert!((v["fisher"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-10);
    let dir = tempfile::tempdir().unwrap();
    let o = mlexp(&["moments", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("moments.csv").exists() && dir.path().join("moments.json").exists());
    assert_eq!(manifest(dir.path())["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn validate_reports_json() {
    let o = mlexp(&["validate", "--family", "logistic"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["conditions"]["conditions"].as_array().unwrap().len(), 4);
}

#[test]
fn compose_check_passes_for_logistic() {
    let o = mlexp(&["compose-check", "--family", "logistic", "--n", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["suspected_block"].is_null());
    assert_eq!(v["orders"].as_array().unwrap().len(), 5);
}

fn simulate_into(dir: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = mlexp(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_outputs_and_replay_are_bit_identical() {
    let root = tempfile::tempdir().unwrap();
    let first = root.path().join("first");
    simulate_into(
        &first,
        &["--family", "logistic", "--n", "20,40", "--reps", "1500", "--seed", "42", "--order", "3", "--workers", "1"],
    );
    let names = [
        "report.json",
        "ecdf_20.csv",
        "ecdf_40.csv",
        "remainders_20.csv",
        "remainders_40.csv",
        "plot_20.csv",
        "plot_40.csv",
    ];
    for n in names {
        assert!(first.join(n).exists(), "{n} missing");
    }
    let m = manifest(&first);
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["base_seed"], 42);
    assert_eq!(m["outputs"].as_array().unwrap().len(), names.len());

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(first.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["per_n"].as_array().unwrap().len(), 2);
    assert!(report.get("workers").is_none());
    let ecdf = fs::read_to_string(first.join("ecdf_20.csv")).unwrap();
    assert_eq!(ecdf.lines().next(), Some("x,ecdf_left,ecdf_right,value_order1,value_order2,value_order3"));
    assert_eq!(ecdf.lines().count(), 802);
    assert_eq!(fs::read_to_string(first.join("remainders_40.csv")).unwrap().lines().count(), 1501);

    let manifest_path = first.join("manifest.json");
    for workers in ["3", "8"] {
        let again = root.path().join(format!("w{workers}"));
        simulate_into(&again, &["--manifest", manifest_path.to_str().unwrap(), "--workers", workers]);
        for n in names {
            assert_eq!(fs::read(first.join(n)).unwrap(), fs::read(again.join(n)).unwrap(), "{n} differs");
        }
        assert_eq!(manifest(&again)["outputs"], m["outputs"]);
    }
}

#[test]
fn simulate_reads_toml_config() {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("study.toml");
    fs::write(
        &cfg,
        "n_grid = [15]\nreplications = 300\nbase_seed = 7\norders = [1, 2]\neval_grid = \"-2:2:0.5\"\n\n[family]\nname = \"student-t\"\nparams = { nu = 6 }\n",
    )
    .unwrap();
    let out = root.path().join("out");
    simulate_into(&out, &["--config", cfg.to_str().unwrap(), "--reps", "400"]);
    let m = manifest(&out);
    assert_eq!(m["config"]["study"]["replications"], 400);
    assert_eq!(m["config"]["study"]["family"]["params"]["nu"], "6");
    assert_eq!(fs::read_to_string(out.join("plot_15.csv")).unwrap().lines().count(), 1 + 9 * 3);

    fs::write(&cfg, "n_grid = [15]\nreplications = 300\nbase_seed = 7\ntypo = 1\n[family]\nname = \"normal\"\n").unwrap();
    let o = mlexp(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn manifest_replay_of_other_commands() {
    let root = tempfile::tempdir().unwrap();
    let a = root.path().join("a");
    let o = mlexp(&["cdf", "--family", "logistic", "--n", "30", "--out-dir", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let mpath = a.join("manifest.json");
    let b = root.path().join("b");
    let o = mlexp(&["cdf", "--manifest", mpath.to_str().unwrap(), "--n", "999", "--out-dir", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(a.join("cdf.csv")).unwrap(), fs::read(b.join("cdf.csv")).unwrap());
    assert_eq!(mlexp(&["quantile", "--manifest", mpath.to_str().unwrap()]).status.code(), Some(2));
}
