//! Runs every acceptance criterion and prints one verdict line per criterion.
//!
//! `cargo test -p alphaframe --test acceptance -- 4 7` runs a subset.

use std::process::ExitCode;
use std::time::Instant;

use alphaframe::verify::{run_criterion, CRITERIA};

const SEED: u64 = 20240611;

fn main() -> ExitCode {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u32> = CRITERIA.iter().map(|c| c.0).filter(|id| picked.is_empty() || picked.contains(id)).collect();
    let mut failed = 0;
    for id in ids {
        let start = Instant::now();
        let outcome = run_criterion(id, SEED);
        println!("{}  ({:.1}s)", outcome.line(), start.elapsed().as_secs_f64());
        for (k, v) in &outcome.metrics {
            println!("      {k}: {v:.6e}");
        }
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
