use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dismetrics(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dismetrics"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn generate(dir: &Path, spec: &str, file: &str) {
    let o = dismetrics(&["gen", "--spec", spec, "--seed", "7", "-o", file], dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn gen_writes_dataset_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "entangled:level=0.5,K=5,n=1000", "d.csv");
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(text.lines().count(), 1001);
    assert!(text.starts_with("z_1:c,z_2:c,z_3:c,z_4:c,z_5:c,c_1,"));
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["spec"], "entangled:level=0.5,K=5,n=1000");
    assert_eq!(meta["ground_truth"]["encoder"]["mixing"].as_array().unwrap().len(), 5);
}

#[test]
fn eval_dataset_selected_metrics() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "disentangled:K=3,n=2000", "d.csv");
    let o = dismetrics(&["eval", "--dataset", "d.csv", "--metrics", "mig,3charm"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let reports: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["metric"], "mig");
    assert_eq!(reports[1]["metric"], "3charm");
    assert!(reports[1]["score"].as_f64().unwrap() > 0.9);
    assert_eq!(reports[0]["config"]["binning"]["bins"], 20);
}

#[test]
fn eval_dataset_default_runs_all_dataset_metrics() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "disentangled:K=2,n=500", "d.csv");
    let o = dismetrics(&["eval", "--dataset", "d.csv", "--format", "csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let names: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["dci", "sap", "mig", "3charm"]);
}

#[test]
fn eval_dataset_rejects_interventional_metric() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "identity:n=100", "d.csv");
    let o = dismetrics(&["eval", "--dataset", "d.csv", "--metrics", "betavae", "-o", "r.json"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("requires interventional oracle"), "{}", stderr(&o));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn eval_bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = dismetrics(&["eval", "--dataset", "missing.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing.csv"), "{}", stderr(&o));

    std::fs::write(dir.path().join("bad.csv"), "z:c,c\n1,2\nx,3\n").unwrap();
    let o = dismetrics(&["eval", "--dataset", "bad.csv"], dir.path());
    assert!(!o.status.success());

    let o = dismetrics(&["eval", "--oracle", "nosuch"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("betavae-counterexample"), "{}", stderr(&o));
}

#[test]
fn eval_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.matrix"),
        "# parametric example\n2,3\n1,1\n0.9,0\n0.1,0.1\n0,0.9\n",
    )
    .unwrap();
    let o = dismetrics(&["eval", "--matrix", "p.matrix", "--metrics", "3charm,mig,dci"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let reports: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let score = |i: usize| reports[i]["score"].as_f64().unwrap();
    assert!((score(0) - 0.9).abs() < 1e-9);
    assert!((score(1) - 0.8).abs() < 1e-9);
    assert!((score(2) - 0.9).abs() < 1e-9);
}

#[test]
fn reproduce_known_and_unknown_cases() {
    let dir = tempfile::tempdir().unwrap();
    let o = dismetrics(&["reproduce", "dci-two-factor"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("0.9570") && out.contains("0.9574") && out.contains("PASS"), "{out}");

    let o = dismetrics(&["reproduce", "nosuch"], dir.path());
    assert!(!o.status.success());
    for case in ["betavae-fails-p2", "dci-eleven-factor", "sap-nonlinear", "parametric-table"] {
        assert!(stderr(&o).contains(case));
    }
}

#[test]
fn sweep_grid_and_zero_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = dismetrics(&["sweep", "--eps", "0,0.5,1", "--eps1", "0,0.2"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "eps,eps1,three_charm,mig,dci,dci_not_computable");
    assert_eq!(lines.len(), 1 + 6);
    assert_eq!(lines[1], "0,0,0,0,0,true");

    let o = dismetrics(&["sweep", "--eps", "1.5", "--eps1", "0"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn compare_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.matrix"), "2,4\n1,1\n1,0\n0.9,0\n0,1\n0,0.9\n").unwrap();
    std::fs::write(dir.path().join("b.matrix"), "2,2\n1,1\n0.8,0.3\n0.3,0.8\n").unwrap();
    let o = dismetrics(
        &["compare", "a.matrix", "b.matrix", "--metrics", "mig,3charm,dci", "-o", "cmp.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cmp.json")).unwrap()).unwrap();
    assert_eq!(report["metrics"][0]["preferred"], "b.matrix");
    assert_eq!(report["metrics"][1]["preferred"], "a.matrix");
    assert_eq!(report["disagreements"][0], serde_json::json!(["mig", "3charm"]));

    let o = dismetrics(&["compare", "a.matrix", "a.matrix", "--metrics", "mig,3charm"], dir.path());
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["metrics"].as_array().unwrap().iter().all(|m| m["preferred"].is_null()));
}

#[test]
fn correlate_small_population() {
    let dir = tempfile::tempdir().unwrap();
    let o = dismetrics(
        &[
            "correlate", "--family", "entangled", "--count", "8", "--rows", "1000", "--metrics",
            "mig,3charm,sap", "--population", "pop.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "metric,mig,3charm,sap");
    assert_eq!(out.lines().count(), 4);
    let pop: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pop.json")).unwrap()).unwrap();
    assert_eq!(pop["representations"].as_array().unwrap().len(), 8);
}

#[test]
fn gen_without_output_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = dismetrics(&["gen", "--spec", "identity"], dir.path());
    assert!(!o.status.success());
}
