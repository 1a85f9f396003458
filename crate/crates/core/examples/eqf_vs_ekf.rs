//! Runs the EqF and the error-state EKF on the same circle datasets and
//! prints the comparison table.
//!
//! Usage: `cargo run --release --example eqf_vs_ekf -- [runs]`

use eqf_lio::harness::scenarios::{circle_config, circle_spec, DATASET_SEED_BASE};
use eqf_lio::harness::{compare_runs, FilterKind};
use eqf_lio::sim::generate;

fn main() -> eqf_lio::Result<()> {
    let runs: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    println!("seed  filter  ATE (m)  end-to-end (m)  NEES mean  band fraction");
    for seed in 0..runs {
        let ds = generate(&circle_spec(), DATASET_SEED_BASE + seed)?;
        let configs = [
            ("eqf".to_string(), circle_config(FilterKind::Eqf, seed)),
            ("ekf".to_string(), circle_config(FilterKind::Ekf, seed)),
        ];
        for row in compare_runs(&ds, &configs)? {
            println!(
                "{seed:>4}  {:<6}  {:.4}   {:.4}          {:>8.2}   {:.3}",
                row.filter, row.ate_rmse, row.end_to_end, row.nees_mean, row.nees_band_fraction
            );
        }
    }
    Ok(())
}
