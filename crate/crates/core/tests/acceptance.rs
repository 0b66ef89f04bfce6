//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;

use viscowave::verify::run_all;

fn main() -> ExitCode {
    let results = run_all(false);
    assert_eq!(
        results.iter().map(|r| r.id).collect::<Vec<_>>(),
        (1..=14).collect::<Vec<_>>(),
        "every criterion reports exactly once"
    );
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", results.len(), results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: criteria {failed:?} failed");
        ExitCode::FAILURE
    }
}
