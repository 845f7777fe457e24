use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pu_convex::experiment::read_records;

fn pu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pu-convex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn run_writes_record_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = pu(&["run", "--domain", "disk", "--k-level", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("RMSE"), "{stdout}");

    let text = fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("domain,dim,candidates,n,d,"));
    let records = read_records(&out).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].n, 317);
    assert_eq!(records[0].candidates, 400);
}

#[test]
fn table_honors_max_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let o = pu(&["table", "--domain", "triangle", "--dim", "2", "--max-n", "900", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ns: Vec<usize> = read_records(&out).unwrap().iter().map(|r| r.n).collect();
    assert_eq!(ns, vec![51, 200, 451, 805]);
}

#[test]
fn sweep_writes_two_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = pu(&[
        "sweep", "--domain", "hexagon", "--k-level", "2", "--shape-min", "0.1", "--shape-max", "2",
        "--samples", "4", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = lines(&out);
    assert_eq!(rows[0], "shape,rmse");
    assert_eq!(rows.len(), 5);
    for row in &rows[1..] {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 2);
        assert!(cols[1].is_finite() && cols[1] > 0.0);
    }
}

#[test]
fn field_rows_match_evaluation_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("field.csv");
    let rec = dir.path().join("rec.csv");
    let o = pu(&["field", "--domain", "pyramid", "--k-level", "1", "--eval-per-axis", "12", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = lines(&out);
    assert_eq!(rows[0], "x1,x2,x3,f,I,abserr");

    let o = pu(&["run", "--domain", "pyramid", "--k-level", "1", "--eval-per-axis", "12", "--out", rec.to_str().unwrap()]);
    assert!(o.status.success());
    let s = read_records(&rec).unwrap()[0].s;
    assert_eq!(rows.len() - 1, s);
    for row in &rows[1..] {
        let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(v.len(), 6);
        assert_eq!(v[5], (v[3] - v[4]).abs());
    }
}

#[test]
fn hull_domain_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let hull = dir.path().join("square.txt");
    // The square [0.2, 0.8]^2 as four halfspaces.
    fs::write(&hull, "# square\n2 4\n1 0 0.8\n-1 0 -0.2\n0 1 0.8\n0 -1 -0.2\n").unwrap();
    let domain = format!("hull:{}", hull.display());
    let o = pu(&["run", "--domain", &domain, "--dim", "2", "--n", "300"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = pu(&["run", "--domain", &domain, "--n", "300"]);
    assert_eq!(o.status.code(), Some(1), "hull domains need --dim");
}

#[test]
fn exit_codes() {
    assert_eq!(pu(&["--help"]).status.code(), Some(0));
    assert_eq!(pu(&["--version"]).status.code(), Some(0));
    assert_eq!(pu(&["run", "--domain", "sphere"]).status.code(), Some(1));
    assert_eq!(pu(&["run", "--domain", "disk", "--k-level", "9"]).status.code(), Some(1));
    assert_eq!(pu(&["run", "--domain", "disk", "--eval-per-axis", "1"]).status.code(), Some(1));
    assert_eq!(pu(&["run", "--domain", "disk", "--dim", "3"]).status.code(), Some(1));
    assert_eq!(pu(&["run", "--domain", "disk", "--k-level", "2", "--n", "10"]).status.code(), Some(1));
    assert_eq!(pu(&["run", "--domain", "hull:/nonexistent/h.txt", "--dim", "2"]).status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let blocked = dir.path().join("missing").join("out.csv");
    let o = pu(&["run", "--domain", "disk", "--k-level", "1", "--out", blocked.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = pu(&["field", "--domain", "hexagon", "--k-level", "3", "--threads", threads, "--out", path.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
