//! Prints one pass/fail line per acceptance criterion; exits nonzero if any fail.

use std::process::ExitCode;

fn main() -> ExitCode {
    let results = ibrl_harness::acceptance::run_all(None);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
