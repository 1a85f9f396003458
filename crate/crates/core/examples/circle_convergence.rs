//! Runs the EqF on the biased circle from a 5° attitude error and prints how
//! the gyroscope bias estimate settles.
//!
//! Usage: `cargo run --release --example circle_convergence -- [seed]`

use std::time::Instant;

use eqf_lio::harness::scenarios::{circle_config, circle_spec, DATASET_SEED_BASE};
use eqf_lio::harness::{run_dataset, FilterKind};
use eqf_lio::sim::generate;

fn main() -> eqf_lio::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let ds = generate(&circle_spec(), DATASET_SEED_BASE + seed)?;
    let started = Instant::now();
    let out = run_dataset(&ds, &circle_config(FilterKind::Eqf, seed))?;
    let seconds = started.elapsed().as_secs_f64();

    println!("   t    b_g estimate (rad/s)          |error| (rad/s)");
    for e in out.epochs.iter().step_by(50) {
        let b = e.estimate.gyro_bias();
        println!("{:5.1}   [{:+.4}, {:+.4}, {:+.4}]   {:.5}", e.t, b.x, b.y, b.z, (b - e.truth.gyro_bias()).norm());
    }
    let r = &out.report;
    println!(
        "ATE {:.4} m, end-to-end {:.4} m, gyro bias within 3σ: {}, NEES in band {:.2}, {seconds:.1} s",
        r.ate_rmse,
        r.end_to_end,
        r.gyro_bias_within(3.0),
        r.nees_band_fraction
    );
    Ok(())
}
