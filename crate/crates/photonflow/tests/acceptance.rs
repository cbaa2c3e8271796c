//! The full acceptance battery at the pinned tolerances, one line per
//! criterion. The lines go straight to the process stdout so they show up
//! without `--nocapture`.

use std::io::Write;

use photonflow::verify::{run_battery, CRITERIA};

#[test]
fn acceptance_battery() {
    let results = run_battery(1.0, None);
    assert_eq!(results.len(), CRITERIA);
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for r in &results {
        writeln!(out, "{}", r.line()).unwrap();
    }
    out.flush().unwrap();
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed()).map(|r| r.id.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
