use std::fs;
use std::path::Path;

use csa_pcs_cli::{main_with_args, EXIT_CONFIG, EXIT_OK};

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["csa-pcs"];
    v.extend_from_slice(args);
    main_with_args(v)
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn gamma_csv_has_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "gamma", "--csa", "sqrtN", "--N", "10", "--mu", "10", "--trials", "2", "--set", "horizon=200", "--out", out,
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = read(dir.path(), "gamma.csv");
    assert!(csv.starts_with("trial,sigma_star_median,gamma\n"));
    assert_eq!(csv.lines().count(), 3);
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "gamma.json")).unwrap();
    assert_eq!(json["seed"], 1);
    assert_eq!(json["config"]["n"], 10);
    assert!(json["version"].is_string());
}

#[test]
fn invalid_config_exits_with_one_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let code = run(&["gamma", "--set", "alpha_mu=0.9", "--set", "nope=3", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn unparsable_flag_is_a_config_error() {
    assert_eq!(run(&["gamma", "--trials", "many"]), EXIT_CONFIG);
    assert_eq!(run(&["no-such-experiment"]), EXIT_CONFIG);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test\nn = 20\nmu = 7\nrepeats = 5\nalpha_mu = 1.05\n").unwrap();
    let out = dir.path().join("o");
    let code = run(&[
        "median-shift",
        "--config",
        cfg.to_str().unwrap(),
        "--mu",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let json: serde_json::Value = serde_json::from_str(&read(&out, "median-shift.json")).unwrap();
    assert_eq!(json["config"]["n"], 20);
    assert_eq!(json["config"]["mu"], 5);
    assert_eq!(json["config"]["pcs"]["alpha_mu"], 1.05);
}

#[test]
fn same_seed_gives_identical_files_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    let base = [
        "pcs-table", "--method", "all", "--set", "ns=5", "--trials", "3", "--set", "g_max=60", "--set", "mu_max=32",
    ];
    for (out, workers) in [(&a, "1"), (&b, "1"), (&c, "3")] {
        let mut args = base.to_vec();
        args.extend_from_slice(&["--out", out.to_str().unwrap(), "--workers", workers]);
        assert_eq!(run(&args), EXIT_OK);
    }
    assert_eq!(read(&a, "pcs-table.csv"), read(&b, "pcs-table.csv"));
    assert_eq!(read(&a, "pcs-table.csv"), read(&c, "pcs-table.csv"));
    // the summaries differ only in the output directory they record
    let strip = |dir: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&read(dir, "pcs-table.json")).unwrap();
        v["config"]["out"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a), strip(&c));
    let csv = read(&a, "pcs-table.csv");
    assert!(csv.starts_with("row,method,mu_p25,mu_med,mu_p75,f_t,trials,successes,diverged\n"));
    // S5 and N5 for each of the three methods
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn benchmark_rows_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "benchmark", "--suite", "n-sweep", "--set", "ns=4,6", "--method", "apop", "--trials", "2", "--set",
        "mu_max=16", "--trace", "--out", out,
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = read(dir.path(), "benchmark.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,A,method,P_S,E_r,trials,mu_med,f_success_total,f_fail_total"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..3], &["4", "3", "apop"]);
    let traces = fs::read_dir(dir.path().join("traces")).unwrap().count();
    assert_eq!(traces, 4);
}

#[test]
fn schedule_trace_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "schedule", "--N", "10", "--csa", "sqrtN", "--set", "delta_g=0", "--set", "rescale=sqrt", "--set", "mu_max=64",
        "--out", out,
    ]);
    assert_eq!(code, EXIT_OK);
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "schedule.json")).unwrap();
    assert_eq!(json["results"]["verdict"], "converged");
    assert!(read(dir.path(), "schedule.csv").starts_with("g,r,sigma_star,mu\n"));
}

#[test]
fn keys_lists_every_key() {
    assert_eq!(run(&["keys"]), EXIT_OK);
}
