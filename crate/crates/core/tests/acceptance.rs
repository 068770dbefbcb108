//! Prints one PASS/FAIL line per acceptance criterion and fails if any
//! criterion fails.

use std::process::ExitCode;

use drem_core::acceptance;

fn main() -> ExitCode {
    let outcomes = acceptance::run_all();
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} / {} criteria pass", outcomes.len() - failed.len(), outcomes.len());
    if outcomes.len() == 14 && failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
