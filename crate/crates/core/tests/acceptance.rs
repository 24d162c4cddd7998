//! Acceptance grid, one PASS/FAIL line per criterion. Runs without the libtest
//! harness so the matrix is always printed.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use truncdisp::moduli::DEFAULT_SEED;
use truncdisp::selftest::{run_criterion, Outcome, Profile, CRITERIA};

fn classify_with_binary(out: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_truncdisp"))
        .args(["classify", "--p", "2", "--n", "2", "--h", "2", "--workers", "2", "--out"])
        .arg(out)
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "classify failed: {}", String::from_utf8_lossy(&status.stderr));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// The in-process check plus two runs of the installed binary.
fn determinism_via_binary(base: Outcome) -> Outcome {
    let start = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (fa, fb) = (classify_with_binary(a.path()), classify_with_binary(b.path()));
    let same = !fa.is_empty() && fa == fb;
    Outcome {
        passed: base.passed && same,
        detail: format!("{}; binary: {} files {}", base.detail, fa.len(), if same { "identical" } else { "DIFFER" }),
        elapsed: base.elapsed + start.elapsed(),
        ..base
    }
}

fn main() {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let mut outcome = run_criterion(c, Profile::Full, DEFAULT_SEED);
        if c.id == 10 {
            outcome = determinism_via_binary(outcome);
        }
        println!(
            "{} criterion {:>2} ({}) in {:.2}s, limit {}s: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.id,
            outcome.name,
            outcome.elapsed.as_secs_f64(),
            outcome.limit.as_secs(),
            outcome.detail
        );
        if !outcome.passed {
            failed.push(outcome.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", CRITERIA.len(), CRITERIA.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
