use std::path::Path;
use std::process::{Command, Output};

use waveguide_pair::analysis::EmissionReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waveguide-pair")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn lifetime_at_default_parameters() {
    let out = run(&["lifetime"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["tau2", "gamma_atom", "re_sigma2", "im_sigma2", "product"]);
    let tau: f64 = rows[0][0].parse().unwrap();
    assert!((tau - 182.33).abs() < 0.01, "{tau}");
    let product: f64 = rows[0][4].parse().unwrap();
    assert!((product - 1.0).abs() < 1e-12);
}

#[test]
fn ratio_report_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratio.json");
    let out = run(&["ratio", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let report: EmissionReport = serde_json::from_str(&text).unwrap();
    assert!((2.7..=3.0).contains(&report.ratio), "{}", report.ratio);
    let again: EmissionReport = serde_json::from_str(&serde_json::to_string_pretty(&report).unwrap()).unwrap();
    assert_eq!(report, again);
}

fn density(path: &Path) -> Output {
    run(&["density", "--window", "-0.6,0.6", "--resolution", "24x16", "--lambda", "0.02", "--out", path.to_str().unwrap()])
}

#[test]
fn density_grid_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(density(&a).status.success());
    assert!(density(&b).status.success());
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let (header, rows) = csv_rows(std::str::from_utf8(&ta).unwrap());
    assert_eq!(header, ["k1", "k2", "P"]);
    assert_eq!(rows.len(), 24 * 16);
    // 17 significant digits
    assert_eq!(rows[5][2].split('e').next().unwrap().trim_start_matches('-').len(), 18);
}

#[test]
fn sweep_writes_one_row_per_value() {
    let out = run(&["sweep", "--var", "lambda", "--values", "0.01,0.02", "--k0d", "1.5", "--tol", "1e-5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["param", "P_par", "P_anti", "R", "dR", "norm", "status"]);
    assert_eq!(rows.len(), 2);
    let r: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(r[1] < r[0], "{r:?}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# self-energy at the atomic frequency\nlambda = 0.02\nk0d = 0.5\nformat = json\n").unwrap();
    let out = run(&["selfenergy", "--config", cfg.to_str().unwrap(), "--lambda", "0.01", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header[0], "sector");
    assert_eq!(rows[0][0], "+1");
    let im: f64 = rows[0][4].parse().unwrap();
    assert!((im / -1.3711e-3 - 1.0).abs() < 1e-4, "{im}");
}

#[test]
fn validate_reports_per_criterion() {
    let out = run(&["validate", "--criteria", "3,4,6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[2] == "true"));
    let unknown = run(&["validate", "--criteria", "42"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn invalid_input_exits_nonzero() {
    assert_eq!(run(&["ratio", "--omega0", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["ratio", "--d", "1", "--k0d", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = run(&["ratio", "--out", "/nonexistent/dir/r.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}
