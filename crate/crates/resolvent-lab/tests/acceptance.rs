//! The acceptance gate: runs the full thirteen-criterion campaign at the
//! pinned seed and requires every criterion to pass.
//!
//! One line per criterion is printed as the campaign progresses (visible
//! with `cargo test --test acceptance -- --nocapture`, or on failure).
//! Artifacts land in a temporary directory so the run also exercises the
//! CSV/JSON writers.

use resolvent_lab::harness::acceptance::{run_acceptance, AcceptanceOptions};
use resolvent_lab::harness::ExpectedValues;

#[test]
fn all_criteria_pass_at_desk_scale() {
    let out = std::env::temp_dir().join(format!("resolvent-lab-acceptance-{}", std::process::id()));
    let opts = AcceptanceOptions {
        seed: 0,
        out: Some(out.clone()),
        only: None,
        expected: ExpectedValues::embedded().expect("embedded expected values parse"),
    };
    let report = run_acceptance(&opts).expect("acceptance campaign runs to completion");

    for result in &report.results {
        println!("{}", result.line());
        if !result.pass {
            eprintln!("  detail: {}", result.detail);
        }
    }
    assert_eq!(report.results.len(), 13, "all thirteen criteria must run");
    assert_eq!(report.errored, 0, "no criterion may error out");
    let failures: Vec<&str> = report
        .results
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.id.as_str())
        .collect();
    assert!(
        report.all_passed(),
        "failed criteria: {failures:?} (details above)"
    );

    let json = out.join("acceptance.json");
    assert!(json.is_file(), "acceptance.json must be written");
    let _ = std::fs::remove_dir_all(&out);
}
