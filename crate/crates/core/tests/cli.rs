//! End-to-end runs of the `eigencnt` binary.

use std::path::Path;
use std::process::{Command, Output};

fn eigencnt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigencnt")).args(args).output().unwrap()
}

fn synth(dir: &Path, eigs: &str, real: bool) -> String {
    let out = dir.join(if real { "real.mtx" } else { "cplx.mtx" });
    let out = out.to_str().unwrap().to_string();
    let mut args = vec!["synth", "--eigenvalues", eigs, "--seed", "3", "--out", &out];
    if real {
        args.push("--real");
    }
    let o = eigencnt(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn count_with_report_and_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = synth(dir.path(), "0.5,0.5, -0.5,0.2, 2,2, 0.1,-0.3", false);
    let report = dir.path().join("r.json");
    let nodes = dir.path().join("n.csv");
    let o = eigencnt(&[
        "count",
        "--matrix",
        &mtx,
        "--box",
        "-1,1,-1,1",
        "--report",
        report.to_str().unwrap(),
        "--nodes",
        nodes.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&report);
    assert_eq!(r["count"], 3);
    assert_eq!(r["reliable"], true);
    for key in ["arg_sum", "residual", "n_nodes", "n_lu", "n_refine_rounds", "warnings", "wall_time"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    let n_nodes = r["n_nodes"].as_u64().unwrap() as usize;
    assert_eq!(r["n_lu"].as_u64().unwrap(), 2 * n_nodes as u64 + r["n_retries"].as_u64().unwrap());

    let csv = std::fs::read_to_string(&nodes).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_order,re,im,origin"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), n_nodes);
    assert_eq!(rows.iter().filter(|r| r[3] == "user").count(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), i);
        assert!(row[1].parse::<f64>().is_ok() && row[2].parse::<f64>().is_ok());
        assert!(row[3] == "user" || row[3] == "inserted");
    }
}

#[test]
fn report_to_stdout_and_symmetry_flag() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = synth(dir.path(), "0.3,0.4, 0.3,-0.4, -0.2,0, 3,0", true);
    let run = |extra: &[&str]| {
        let mut args = vec!["count", "--matrix", &mtx, "--circle", "0,0,1,10"];
        args.extend_from_slice(extra);
        let o = eigencnt(&args);
        assert_eq!(o.status.code(), Some(0));
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    let on = run(&[]);
    let off = run(&["--no-symmetry", "--threads", "2"]);
    assert_eq!(on["count"], 3);
    assert_eq!(off["count"], 3);
    assert_eq!(on["half_contour"], true);
    assert_eq!(off["half_contour"], false);
}

#[test]
fn vertices_form_and_env_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = synth(dir.path(), "0.5,0.5, 5,5", false);
    let o = Command::new(env!("CARGO_BIN_EXE_eigencnt"))
        .args(["count", "--matrix", &mtx, "--vertices", "0,0 1,0 1,1 0,1"])
        .env("EIGENCNT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["count"], 1);
}

#[test]
fn fatal_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("diag.mtx");
    std::fs::write(&mtx, "%%MatrixMarket matrix coordinate real general\n2 2 1\n2 2 1.0\n").unwrap();
    let mtx = mtx.to_str().unwrap();
    // A = diag(0, 1) with a contour vertex on the eigenvalue 0.
    let o = eigencnt(&["count", "--matrix", mtx, "--box", "0,0.5,0,0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    // Missing file.
    let o = eigencnt(&["count", "--matrix", "/nonexistent.mtx", "--box", "0,1,0,1"]);
    assert_eq!(o.status.code(), Some(1));
    // Usage errors: two polygon forms at once, or none.
    let o = eigencnt(&["count", "--matrix", mtx, "--box", "0,1,0,1", "--circle", "0,0,1,8"]);
    assert_eq!(o.status.code(), Some(1));
    let o = eigencnt(&["count", "--matrix", mtx]);
    assert_eq!(o.status.code(), Some(1));
}
