use std::path::Path;
use std::process::{Command, Output};

use naimark::scenarios::Table;
use serde_json::Value;

fn naimark(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_naimark"))
        .args(args)
        .current_dir(cwd)
        .env_remove("NAIMARK_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const SHORT_FIG2: [&str; 6] = [
    "--override",
    "t_max=8",
    "--override",
    "dt=0.01",
    "--override",
    "record_every=5",
];

fn run_fig2(dir: &Path) -> Output {
    let mut args = vec!["run", "--scenario", "fig2", "--out", dir.to_str().unwrap()];
    args.extend(SHORT_FIG2);
    naimark(&args, dir)
}

#[test]
fn run_writes_csv_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_fig2(tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(tmp.path().join("fig2.csv")).unwrap();
    assert!(csv.starts_with("t,bloch_x,bloch_y,bloch_z,entropy,p0,p1,norm,min_eig_M\n"));
    let table = Table::parse_csv(&csv).unwrap();
    assert_eq!(table.rows.len(), 161);
    assert_eq!(Table::parse_csv(&table.to_csv()).unwrap(), table);

    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("fig2.manifest.json")).unwrap(),
    )
    .unwrap();
    let registered = manifest["registered_checks"].as_array().unwrap().len();
    assert_eq!(manifest["checks"].as_array().unwrap().len(), registered);
    assert_eq!(manifest["failed"], 0);
    assert_eq!(manifest["config"]["dt"], 0.01);
    assert_eq!(stdout_json(&out)["passed"], manifest["passed"]);
}

#[test]
fn identical_runs_write_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_fig2(a.path());
    run_fig2(b.path());
    assert_eq!(
        std::fs::read(a.path().join("fig2.csv")).unwrap(),
        std::fs::read(b.path().join("fig2.csv")).unwrap()
    );
}

#[test]
fn config_file_then_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"scenario": "fig3", "gamma": 2.0, "t_max": 8.0, "dt": 0.01, "record_every": 100}"#,
    )
    .unwrap();
    let out = naimark(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--override",
            "gamma=1.0",
            "--out",
            "res",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json = stdout_json(&out);
    assert_eq!(json["config"]["gamma"], 1.0);
    assert_eq!(json["config"]["scenario"], "fig3");
    assert!(tmp.path().join("res/fig3.csv").exists());
}

#[test]
fn output_dir_falls_back_to_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("from_env");
    let mut args = vec!["run", "--scenario", "fig2"];
    args.extend(SHORT_FIG2);
    let out = Command::new(env!("CARGO_BIN_EXE_naimark"))
        .args(&args)
        .current_dir(tmp.path())
        .env("NAIMARK_OUTPUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("fig2.csv").exists());
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn usage_errors_exit_one_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = naimark(
        &["run", "--scenario", "fig2", "--override", "dt=-1"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));

    let out = naimark(&["run", "--scenario", "fig9"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig9"));

    let out = naimark(&["run", "--config", "missing.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));

    let out = naimark(&["frobnicate"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_dilatable_custom_run_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = naimark(
        &[
            "run",
            "--scenario",
            "custom",
            "--override",
            "h_m_diag=[-1, 1]",
            "--override",
            "t_max=8",
            "--override",
            "dt=0.01",
            "--out",
            "o",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn verify_filters_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = naimark(&["verify", "--filter", "random", "--seed", "7"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["selected"], 2);
    assert_eq!(json["seed"], 7);
    for c in json["checks"].as_array().unwrap() {
        assert!(c["name"].as_str().unwrap().starts_with("random_"));
        assert_eq!(c["pass"], true);
    }
    let out = naimark(&["verify", "--filter", "no_such_check"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_points_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep",
        "--scenario",
        "fig2",
        "--param",
        "gamma",
        "--values",
        "1.0,2.0",
        "--out",
        "s",
    ];
    args.extend(SHORT_FIG2);
    let out = naimark(&args, tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = tmp.path().join("s");
    assert!(dir.join("fig2_gamma=1.csv").exists() || dir.join("fig2_gamma=1.0.csv").exists());
    let summary =
        Table::parse_csv(&std::fs::read_to_string(dir.join("fig2_gamma_sweep.csv")).unwrap())
            .unwrap();
    assert_eq!(summary.column("gamma").unwrap(), vec![1.0, 2.0]);
}
