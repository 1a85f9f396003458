//! Generates a short figure-eight dataset, writes it to disk and reads it back.
//!
//! Usage: `cargo run --release --example simulate_dataset -- [out_dir]`

use eqf_lio::harness::io::{read_dataset, write_dataset};
use eqf_lio::sim::{generate, SimSpec, TrajectoryKind};

fn main() -> eqf_lio::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/example_dataset".into());
    let mut spec = SimSpec::default();
    spec.trajectory.kind = TrajectoryKind::Figure8;
    spec.trajectory.duration = 5.0;
    let ds = generate(&spec, 7)?;
    write_dataset(out.as_ref(), &ds)?;
    let back = read_dataset(out.as_ref())?;

    let points: usize = ds.scans.iter().map(|s| s.points.len()).sum();
    println!(
        "{}: {} IMU samples, {} scans, {:.0} points per scan",
        out,
        back.imu.len(),
        back.scans.len(),
        points as f64 / ds.scans.len() as f64
    );
    let last = &back.truth[back.truth.len() - 1];
    println!("final truth position {:.3?}", last.state.nav.pos.as_slice());
    println!("IMU round trip exact: {}", back.imu == ds.imu);
    Ok(())
}
