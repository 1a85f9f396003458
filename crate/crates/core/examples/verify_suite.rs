//! Runs the randomized verification checks, optionally filtered by name.
//!
//! Usage: `cargo run --release --example verify_suite -- [name]`

use eqf_lio::harness::verify::check_names;
use eqf_lio::harness::{run_checks, VerifyOptions};

fn main() {
    let opts = VerifyOptions {
        filter: std::env::args().nth(1),
        ..Default::default()
    };
    println!("available: {}", check_names().join(", "));
    for r in run_checks(&opts) {
        println!(
            "{} {:<16} {:>5} cases  residual {:.2e} < {:.0e}  {:.3} s",
            if r.passed { "ok  " } else { "FAIL" },
            r.name,
            r.cases,
            r.residual,
            r.tolerance,
            r.seconds
        );
    }
}
