use std::process::{Command, Output};

use truncdisp::display::TruncatedDisplay;
use truncdisp::ring::FiniteRing;
use truncdisp::witt::WittRing;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_truncdisp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn witt_expressions() {
    assert_eq!(stdout(&run(&["witt", "w[1,0] + w[1,0]"])).trim(), "w[0,1]");
    assert_eq!(stdout(&run(&["witt", "f1(v(w[1,1]))"])).trim(), "w[1,1]");
    assert_eq!(stdout(&run(&["witt", "--n", "4", "teich(1) * teich(1)"])).trim(), "w[1,0,0,0]");
    let bad = run(&["witt", "w[1,0] * w[1]"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("level mismatch"));
}

#[test]
fn classify_reports_and_guards() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["classify", "--p", "2", "--n", "1", "--h", "2", "--out", out]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("d=1: 2 classes, mass 3/2 = 3/2 ok"));
    let o = run(&["classify", "--p", "2", "--n", "1", "--h", "1", "--format", "csv", "--out", out]);
    assert!(o.status.success());
    for d in 0..=1 {
        let csv = std::fs::read_to_string(dir.path().join(format!("classes_gf2_n1_h1_d{d}.csv"))).unwrap();
        assert!(csv.starts_with("rep_matrix,orbit_size,aut_order,d,nilpotent,slopes"));
        assert_eq!(csv.lines().count(), 2);
    }
    let guarded = tempfile::tempdir().unwrap();
    let o = run(&["classify", "--p", "2", "--n", "3", "--h", "6", "--out", guarded.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(std::fs::read_dir(guarded.path()).unwrap().count(), 0);
    assert_eq!(run(&["classify", "--n", "1", "--h", "1", "--budget", "0"]).status.code(), Some(2));
}

#[test]
fn analyze_reports() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, d: &TruncatedDisplay| {
        let path = dir.path().join(name);
        std::fs::write(&path, serde_json::to_string(&d.to_file()).unwrap()).unwrap();
        path.to_str().unwrap().to_string()
    };
    let w = WittRing::new(&FiniteRing::parse("GF(2)").unwrap(), 1).unwrap();
    let m = stdout(&run(&["analyze", &write("m.json", &TruncatedDisplay::mult_unit(&w))]));
    assert!(m.contains("nilpotent=true") && m.contains("slopes=[1]"), "{m}");
    let e = stdout(&run(&["analyze", &write("e.json", &TruncatedDisplay::etale_unit(&w))]));
    assert!(e.contains("nilpotent=false") && e.contains("slopes=[0]") && e.contains("aut_order=1"), "{e}");
    let t = WittRing::new(&FiniteRing::parse("GF(2)[x]/x^3").unwrap(), 1).unwrap();
    let o = run(&["analyze", &write("t.json", &TruncatedDisplay::mult_unit(&t))]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("nilpotent=true") && !s.contains("slopes=") && s.contains("note:"), "{s}");
    assert_eq!(run(&["analyze", "/nonexistent/display.json"]).status.code(), Some(1));
}

#[test]
fn selftest_quick() {
    let o = run(&["selftest", "quick"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("10/10 criteria passed"));
}
