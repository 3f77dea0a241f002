//! Acceptance suite: one line per criterion, each checked for correctness and
//! for its runtime limit. Runs without the libtest harness so the lines are
//! always printed, and criteria run sequentially so timings are not skewed by
//! sibling tests competing for cores.

use std::process::ExitCode;

use spencer_core::checks::{run_all, CheckOptions, CRITERIA};

fn main() -> ExitCode {
    let results = run_all(&CheckOptions::default());
    assert_eq!(results.len(), CRITERIA.len());
    println!("acceptance: {} criteria", results.len());
    for r in &results {
        println!("{r}");
        if !r.passed || !r.within_limit() {
            for line in &r.details {
                println!("    {line}");
            }
        }
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    let slow: Vec<u8> = results.iter().filter(|r| !r.within_limit()).map(|r| r.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
    }
    if !slow.is_empty() {
        eprintln!("criteria over their time limit: {slow:?}");
    }
    if failed.is_empty() && slow.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
