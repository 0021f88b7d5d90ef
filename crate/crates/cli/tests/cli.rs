use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SUBCOMMANDS: [&str; 7] = [
    "catalog",
    "eval",
    "residual",
    "classify",
    "invariance",
    "build",
    "solve",
];

fn varlag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varlag"))
        .args(args)
        .env("VARLAG_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn snapshot_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots")
}

fn check_snapshot(name: &str, actual: &str) {
    let path = snapshot_dir().join(name);
    if std::env::var_os("UPDATE_SNAPSHOTS").is_some() {
        std::fs::create_dir_all(snapshot_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing {}; rerun with UPDATE_SNAPSHOTS=1", path.display()));
    assert_eq!(
        actual, expected,
        "help for {name} changed; rerun with UPDATE_SNAPSHOTS=1 if intended"
    );
}

#[test]
fn help_snapshots() {
    let top = varlag(&["--help"]);
    assert_eq!(top.status.code(), Some(0));
    check_snapshot("varlag.help.txt", &stdout(&top));
    for sub in SUBCOMMANDS {
        let o = varlag(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        check_snapshot(&format!("{sub}.help.txt"), &stdout(&o));
    }
}

#[test]
fn every_flag_is_documented() {
    let cmd = varlag_cli::command();
    for sub in cmd.get_subcommands() {
        let help = stdout(&varlag(&[sub.get_name(), "--help"]));
        for arg in sub.get_arguments() {
            if let Some(long) = arg.get_long() {
                assert!(
                    help.contains(&format!("--{long}")),
                    "{} --{long} missing from help",
                    sub.get_name()
                );
                assert!(arg.get_help().is_some(), "{} --{long} has no help text", sub.get_name());
            }
        }
    }
}

#[test]
fn catalog_lists_every_entry() {
    let o = varlag(&["catalog", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids.len(), varlag::catalog::entries().len());
    assert!(ids.contains(&"minimal-surface-axi"));
}

#[test]
fn exit_codes() {
    assert_eq!(
        varlag(&["classify", "--catalog", "minimal-surface-axi"]).status.code(),
        Some(0)
    );
    assert_eq!(varlag(&["classify", "--catalog", "dirichlet"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("dirichlet.lag");
    std::fs::write(&file, "name: dirichlet\nn: 2\nL = p1^2 + p2^2\n").unwrap();
    let o = varlag(&["classify", "--file", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(
        varlag(&["classify", "--catalog", "minimal-surface-axi", "--bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(varlag(&["classify"]).status.code(), Some(1));
    assert_eq!(
        varlag(&["classify", "--catalog", "no-such-entry"]).status.code(),
        Some(1)
    );
    assert_eq!(
        varlag(&["classify", "--catalog", "dirichlet", "--tau", "1e-20"])
            .status
            .code(),
        Some(1)
    );
    let o = varlag(&["invariance", "--catalog", "dirichlet", "--curve", "parabola"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "classify",
        "--catalog",
        "helfrich-canham-axi",
        "--trials",
        "10",
        "--jets",
        "50",
        "--seed",
        "7",
    ];
    let a = varlag(&args);
    let b = varlag(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["verdicts"]["T"], "pass (statistical)");
    assert_eq!(v["seed"], 7);
}

#[test]
fn param_override_reaches_the_lagrangian() {
    let o = varlag(&[
        "eval",
        "--catalog",
        "helfrich-canham-axi",
        "--param",
        "kappa=2",
        "--param",
        "kappa_g=0",
        "--u",
        "1,0",
        "--p",
        "1,0",
        "--q",
        "0,1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let base = varlag(&[
        "eval",
        "--catalog",
        "helfrich-canham-axi",
        "--param",
        "kappa=1",
        "--param",
        "kappa_g=0",
        "--u",
        "1,0",
        "--p",
        "1,0",
        "--q",
        "0,1",
    ]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    let w: f64 = stdout(&base).trim().parse().unwrap();
    assert!((v - 2.0 * w).abs() <= 1e-12 * w.abs(), "{v} {w}");
}

#[test]
fn build_writes_lag_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlag(&[
        "build",
        "--kind",
        "second-order",
        "--f",
        "w1^2",
        "--n",
        "2",
        "--name",
        "bend",
        "--trials",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lag = std::fs::read_to_string(dir.path().join("bend.lag")).unwrap();
    let def = varlag::dsl::read_lag(&lag).unwrap();
    assert_eq!(def.order, 2);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bend.report.json")).unwrap()).unwrap();
    assert_eq!(report["verdicts"]["T"], "pass (statistical)");
}

#[test]
fn solve_catenoid() {
    let dir = tempfile::tempdir().unwrap();
    let r = 0.5f64.cosh();
    let bc = format!("{r},-0.5:{r},0.5");
    let o = varlag(&[
        "solve",
        "--catalog",
        "minimal-surface-axi",
        "--bc",
        &bc,
        "--gauge",
        "graph:2",
        "--m",
        "101",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,u1,u2"));
    let mut worst = 0.0f64;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        worst = worst.max((v[1] - v[2].cosh()).abs());
    }
    assert!(worst < 1e-4, "{worst}");
    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("log.json")).unwrap()).unwrap();
    assert_eq!(log["converged"], true);
    assert!(dir.path().join("profile.csv").exists());
}

#[test]
fn solve_rejects_bad_gauge() {
    let o = varlag(&[
        "solve",
        "--catalog",
        "minimal-surface-axi",
        "--bc",
        "1,0:1,1",
        "--gauge",
        "graph:3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("graph:K"));
}

#[test]
fn unconverged_solve_writes_best_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let o = varlag(&[
        "solve",
        "--catalog",
        "minimal-surface-axi",
        "--bc",
        "0.2,-1:0.2,1",
        "--gauge",
        "graph:2",
        "--m",
        "41",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("log.json")).unwrap()).unwrap();
    assert_eq!(log["converged"], false);
    assert!(dir.path().join("solution.csv").exists());
}
