//! One PASS/FAIL line per acceptance criterion; nonzero exit if any fail.

use fermi_bisect::verify::run_all;

fn main() {
    let reports = run_all(20_240_601);
    let mut failed = 0;
    for (i, r) in reports.iter().enumerate() {
        println!("criterion {}: {}", i + 1, r.line());
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria pass", reports.len() - failed, reports.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
