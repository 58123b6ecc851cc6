use std::path::Path;
use std::process::{Command, Output};

fn cluster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cluster"))
        .args(args)
        .env_remove("CLUSTER_MAX_QUBITS")
        .output()
        .expect("run cluster")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn wbc() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/breast-cancer-wisconsin.data")
        .display()
        .to_string()
}

#[test]
fn circles_summary_line() {
    let o = cluster(&["qhca", "--circles", "n=400,factor=0.5,noise=0.1,seed=4", "--scale", "10", "--ancillae", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("qhca circles: N=400 k=4 n=4 m=2 purity=1.0000 time="), "{out}");
}

#[test]
fn wbc_unsharp_reports_accuracy() {
    let o = cluster(&["unsharp", "--wbc", &wbc(), "--pca", "--delta", "8", "--kappa", "2", "--scale", "auto:6", "--origin", "farthest-other", "--k", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let acc: f64 = out.split("accuracy=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(acc >= 0.9, "{out}");
}

#[test]
fn usage_errors_exit_two_on_stderr() {
    for args in [
        vec!["qhca", "--circles", "n=20", "--ancillae", "1", "--delta", "2"],
        vec!["unsharp", "--circles", "n=20"],
        vec!["qhca", "--circles", "n=20", "--tsplib", "x.tsp", "--ancillae", "1"],
        vec!["divisive", "--circles", "n=20", "--k", "2", "--scale", "10"],
        vec!["qhca", "--unknown-flag"],
        vec!["qhca", "--circles", "factor=2", "--ancillae", "1"],
    ] {
        let o = cluster(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stdout(&o).is_empty());
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn runtime_errors_exit_one() {
    let o = cluster(&["divisive", "--tsplib", "/nonexistent/ch.tsp", "--k", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/ch.tsp"));

    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let o = cluster(&["divisive", "--wbc", &wbc(), "--k", "2", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("PCA"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn qubit_cap_comes_from_the_environment() {
    let args = ["qhca", "--circles", "n=40,seed=1", "--scale", "1000", "--ancillae", "2"];
    let o = Command::new(env!("CARGO_BIN_EXE_cluster"))
        .args(args)
        .env("CLUSTER_MAX_QUBITS", "8")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cap is 8"), "{}", stderr(&o));
    assert!(cluster(&args).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_cluster"))
        .args(args)
        .args(["--max-qubits", "24"])
        .env("CLUSTER_MAX_QUBITS", "8")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn sidecar_reruns_to_the_same_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let o = cluster(&["unsharp", "--circles", "n=300,seed=9", "--k", "3", "--kappa", "1.5", "--csv", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sidecar = dir.path().join("first.json");
    let o = cluster(&["unsharp", "--config", sidecar.to_str().unwrap(), "--csv", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    assert_eq!(std::fs::read(&sidecar).unwrap(), std::fs::read(dir.path().join("second.json")).unwrap());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"circles": "n=100,seed=2", "k": 5}"#).unwrap();
    let o = cluster(&["agglomerative", "--config", cfg.to_str().unwrap(), "--k", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(" k=3 "), "{}", stdout(&o));
}

#[test]
fn bench_writes_one_row_per_algorithm_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let o = cluster(&["bench", "--sizes", "50,100", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().any(|r| r.starts_with("qhca,100,")));
}
