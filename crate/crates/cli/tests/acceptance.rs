//! The acceptance gate: one line per criterion, all must pass. The final
//! criterion shells out to the installed binary and re-runs the suite
//! end to end.

use std::process::Command;
use std::time::Instant;

use gausurf::verify::{run_criterion, CRITERIA};

#[test]
fn acceptance() {
    let mut failures = Vec::new();
    for &(id, _) in CRITERIA.iter() {
        let rep = run_criterion(id);
        println!(
            "criterion {:>2}: {:<55} {}",
            rep.id,
            rep.name,
            if rep.pass { "pass" } else { "FAIL" }
        );
        if !rep.pass {
            failures.push(format!("criterion {}: {}", rep.id, rep.details));
        }
    }

    // end-to-end: the CLI verify command exits 0 in under 30 minutes
    let started = Instant::now();
    let out_dir = tempfile::tempdir().expect("tempdir");
    let output = Command::new(env!("CARGO_BIN_EXE_gausurf"))
        .args(["verify", "--out"])
        .arg(out_dir.path())
        .output()
        .expect("spawn gausurf verify");
    let wall = started.elapsed();
    let pass = output.status.success() && wall.as_secs() < 30 * 60;
    println!(
        "criterion 16: {:<55} {}",
        "end-to-end verify command under the wall-clock budget",
        if pass { "pass" } else { "FAIL" }
    );
    if !pass {
        failures.push(format!(
            "criterion 16: exit {:?} after {:.1}s\n{}",
            output.status.code(),
            wall.as_secs_f64(),
            String::from_utf8_lossy(&output.stdout)
        ));
    }

    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
