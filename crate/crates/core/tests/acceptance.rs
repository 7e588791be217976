//! Runs every acceptance criterion, printing one PASS/FAIL line each.

use srrwave::verify::acceptance;
use std::io::Write;

fn main() {
    let mut failed = 0;
    for id in 1..=acceptance::COUNT {
        let outcome = acceptance::run(id);
        println!("{outcome}");
        std::io::stdout().flush().ok();
        failed += usize::from(!outcome.passed);
    }
    println!("{} of {} acceptance criteria passed", acceptance::COUNT - failed, acceptance::COUNT);
    if failed > 0 {
        std::process::exit(1);
    }
}
