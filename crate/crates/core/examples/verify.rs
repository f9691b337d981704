//! The built-in self-check, as printed by `casimir --verify`.

use casimir::cli::verify::{run_suite, table};

fn main() {
    let checks = run_suite();
    print!("{}", table(&checks));
    if !checks.iter().all(|c| c.passed()) {
        std::process::exit(3);
    }
}
