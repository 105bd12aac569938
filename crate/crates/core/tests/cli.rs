//! End-to-end runs of the command-line tool.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modelrip")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn build(dir: &Path, model: &str, eps: &str) -> String {
    let out = path(dir, "build");
    stdout(&run(&["build", "--model", model, "--eps", eps, "--seed", "3", "--out", &out]));
    out
}

#[test]
fn plan_reports_the_planned_sizes() {
    let text = stdout(&run(&["plan", "--model", "block:n=4096,k=64,b=64", "--eps", "0.5"]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..8], &["block", "4096", "64", "64", "0.5", "1", "8", "2048"]);
    assert!(text.lines().nth(2).unwrap().starts_with("compare,"));
    let flags = stdout(&run(&["plan", "--model", "block", "--n", "4096", "--k", "64", "--b", "64", "--eps", "0.5"]));
    assert_eq!(flags, text);
}

#[test]
fn built_certificates_survive_reverification() {
    for model in ["block:n=32,k=8,b=4", "tree:n=31,k=12"] {
        let dir = tempfile::tempdir().unwrap();
        let out = build(dir.path(), model, "0.25");
        let cert = std::fs::read_to_string(format!("{out}/certificate.txt")).unwrap();
        assert!(cert.starts_with("expander: true\n"));
        let again = stdout(&run(&["verify", "--model", model, "--eps", "0.25", "--graph", &format!("{out}/graph.txt")]));
        assert!(cert.starts_with(&again), "{cert}\n{again}");
    }
    let dir = tempfile::tempdir().unwrap();
    let model = "block:n=32,k=8,b=4";
    let out = build(dir.path(), model, "0.25");
    let rip = stdout(&run(&["verify", "--model", model, "--matrix", &format!("{out}/matrix.txt"), "--format", "csv"]));
    let fields: Vec<&str> = rip.lines().nth(1).unwrap().split(',').collect();
    let (lo, hi): (f64, f64) = (fields[0].parse().unwrap(), fields[1].parse().unwrap());
    assert_eq!(fields[2], "exact");
    assert!(0.0 <= lo && lo <= hi && hi <= 0.5 + 1e-12, "{rip}");
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(args).status.code().unwrap();
    let out = path(dir.path(), "x");
    assert_eq!(code(&["build", "--model", "general:n=16,k=4", "--eps", "0.25", "--m", "3", "--d", "4", "--out", &out]), 2);
    assert_eq!(code(&["plan", "--model", "block:n=10,k=4,b=3", "--eps", "0.25"]), 2);
    assert_eq!(code(&["plan", "--model", "tree:n=7,k=2", "--eps", "0.25"]), 2);
    assert_eq!(code(&["plan", "--model", "general:n=16,k=4", "--eps", "1.5"]), 2);
    assert_eq!(code(&["recover", "--model", "general:n=4,k=1", "--matrix", &path(dir.path(), "missing.txt"), "--measurements", &out]), 3);
    let built = build(dir.path(), "block:n=16,k=4,b=2", "0.25");
    let matrix = format!("{built}/matrix.txt");
    assert_eq!(code(&["verify", "--model", "general:n=16,k=4", "--matrix", &matrix, "--mode", "exact", "--cap", "10"]), 3);
    assert_eq!(code(&["verify", "--model", "block:n=16,k=4,b=2", "--matrix", &matrix, "--eps", "0.01"]), 4);
    assert_eq!(code(&["verify", "--model", "block:n=16,k=4,b=2", "--eps", "0.01", "--graph", &format!("{built}/graph.txt")]), 4);
    let failed = run(&["build", "--model", "general:n=16,k=4", "--eps", "0.1", "--m", "8", "--d", "4", "--retries", "2", "--out", &out]);
    assert_eq!(failed.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("2 attempts"), "{}", String::from_utf8_lossy(&failed.stderr));
}

#[test]
fn bench_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let model = "block:n=16,k=4,b=2";
    let built = build(dir.path(), model, "0.25");
    let matrix = format!("{built}/matrix.txt");
    let empty = stdout(&run(&["bench", "--model", model, "--matrix", &matrix, "--trials", "0"]));
    assert_eq!(empty.lines().count(), 1);
    let exact = stdout(&run(&["bench", "--model", model, "--matrix", &matrix, "--trials", "25"]));
    let rows: Vec<&str> = exact.lines().skip(1).collect();
    assert_eq!(rows.len(), 26);
    assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("exact")), "{exact}");

    let rip = stdout(&run(&["verify", "--model", model, "--matrix", &matrix, "--doubled", "--format", "csv"]));
    let eps: f64 = rip.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let noisy = stdout(&run(&["bench", "--model", model, "--matrix", &matrix, "--trials", "30", "--noise", "0.2", "--seed", "5"]));
    let summary = noisy.lines().last().unwrap();
    assert!(summary.starts_with("max,"));
    let worst: f64 = summary.split(',').nth(4).unwrap().parse().unwrap();
    assert!(worst <= 3.0 + 10.0 * eps, "{worst} with eps {eps}");
}

#[test]
fn recover_writes_the_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let model = "block:n=16,k=4,b=2";
    let built = build(dir.path(), model, "0.25");
    let signal = path(dir.path(), "x.txt");
    std::fs::write(&signal, "0 0 0 0 1 -2 0 0 0 0 0 0 0 0 0.5 0.5\n").unwrap();
    let est = path(dir.path(), "xstar.txt");
    let text = stdout(&run(&["recover", "--model", model, "--matrix", &format!("{built}/matrix.txt"), "--signal", &signal, "--out", &est]));
    assert_eq!(text.lines().next().unwrap(), "residual,error,opt_error,ratio,support");
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "exact");
    assert_eq!(row[4], "5;6;15;16");
    let x: Vec<f64> = std::fs::read_to_string(&est).unwrap().trim().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((x[5] + 2.0).abs() < 1e-9 && x[0] == 0.0);
}

#[test]
fn sparsify_writes_matrix_and_column_table() {
    let dir = tempfile::tempdir().unwrap();
    let model = "block:n=16,k=4,b=2";
    let built = build(dir.path(), model, "0.25");
    let out = path(dir.path(), "sparse");
    let text = stdout(&run(&["sparsify", "--model", model, "--eps", "0.05", "--matrix", &format!("{built}/matrix.txt"), "--out", &out]));
    assert!(text.starts_with("kept,covered,"));
    assert!(text.lines().any(|l| l.starts_with("tradeoff,")));
    let table = std::fs::read_to_string(format!("{out}/columns.csv")).unwrap();
    assert_eq!(table.lines().count(), 17);
    assert!(std::fs::read_to_string(format!("{out}/sparsified.txt")).unwrap().starts_with("480 "));
}

#[test]
fn bounds_by_kind_and_by_model() {
    let one = stdout(&run(&["bounds", "--kind", "volume", "--param", "d=3"]));
    assert_eq!(one, "kind,params,value\nvolume,d=3,64\n");
    let scaled = stdout(&run(&["bounds", "--kind", "block-lower", "--param", "n=1024", "--param", "k=16", "--param", "b=4", "--constant", "2"]));
    assert_eq!(scaled.lines().nth(1).unwrap(), "block-lower,b=4;k=16;n=1024,128");
    assert_eq!(run(&["bounds", "--kind", "volume"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--kind", "nonsense", "--param", "d=1"]).status.code(), Some(2));
    let table = stdout(&run(&["bounds", "--model", "block:n=64,k=8,b=4", "--eps", "0.25"]));
    assert!(table.lines().any(|l| l.starts_with("block-lower,")));
    assert!(table.lines().any(|l| l.starts_with("plan-m,")));
}

#[test]
fn config_file_fills_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "run.toml");
    std::fs::write(&cfg, "model = \"block:n=64,k=8,b=4\"\neps = 0.25\n").unwrap();
    let from_file = stdout(&run(&["plan", "--config", &cfg]));
    assert_eq!(from_file, stdout(&run(&["plan", "--model", "block:n=64,k=8,b=4", "--eps", "0.25"])));
    let overridden = stdout(&run(&["plan", "--config", &cfg, "--eps", "0.5"]));
    assert!(overridden.lines().nth(1).unwrap().contains(",0.5,"));
    std::fs::write(&cfg, "colour = 1\n").unwrap();
    assert_eq!(run(&["plan", "--config", &cfg]).status.code(), Some(2));
}
