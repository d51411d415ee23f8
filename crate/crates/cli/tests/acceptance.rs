//! Acceptance matrix: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use syz_cli::suite::{run, SuiteOptions};

fn main() -> ExitCode {
    let opts = SuiteOptions::default();
    println!("acceptance (seed {})", opts.seed);
    let outcomes = run(&[], &opts);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
