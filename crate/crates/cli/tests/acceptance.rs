//! Acceptance suite: runs every criterion at its stated tolerance and prints
//! one pass/fail line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use tridiag_cli::validate::{run_criteria, CRITERIA};

fn main() -> ExitCode {
    let all: Vec<_> = CRITERIA.iter().collect();
    let mut failed = Vec::new();
    let report = run_criteria(&all, 0x5EED, None, {
        let mut last = Instant::now();
        move |c, rows, notes| {
            let ok = rows.iter().all(|r| r.pass);
            println!(
                "{} criterion {:>2}: {} ({:.1}s)",
                if ok { "PASS" } else { "FAIL" },
                c.id,
                c.title,
                last.elapsed().as_secs_f64()
            );
            for r in rows.iter().filter(|r| !r.pass) {
                println!(
                    "      {} vs {}: {} = {:.6e}, tolerance {:.6e}",
                    r.method_a, r.method_b, r.statistic, r.value, r.tolerance
                );
            }
            for n in notes {
                println!("      note: {}", n.text);
            }
            last = Instant::now();
        }
    });
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL acceptance suite: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    for id in report.criterion_ids() {
        if !report.criterion_passes(id) {
            failed.push(id);
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        CRITERIA.len() - failed.len(),
        CRITERIA.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
