//! Reference scenarios: a biased circle with a 5° attitude error and a
//! figure eight with a perturbed extrinsic.

use crate::sim::{SimSpec, TrajectoryKind};

use super::run::{FilterKind, RunConfig};

/// Seed offset between a run seed and the dataset it is evaluated on.
pub const DATASET_SEED_BASE: u64 = 1000;

/// 60 s circle, 100 Hz IMU, 10 Hz LiDAR, σ = 0.02 m, biased IMU.
pub fn circle_spec() -> SimSpec {
    SimSpec::default()
}

/// Filter started 5° off in attitude with zero bias estimates.
pub fn circle_config(filter: FilterKind, seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        filter,
        seed,
        ..Default::default()
    };
    cfg.perturbation.attitude_deg = 5.0;
    cfg.initial_sigma.attitude = 5f64.to_radians() / 3f64.sqrt();
    cfg.initial_sigma.gyro_bias = 0.02;
    cfg.initial_sigma.accel_bias = 0.1;
    cfg
}

/// 60 s figure eight with a 10 s loop.
pub fn figure8_spec() -> SimSpec {
    let mut spec = SimSpec::default();
    spec.trajectory.kind = TrajectoryKind::Figure8;
    spec.trajectory.period = 10.0;
    spec
}

/// Circle start conditions plus a 2° / 0.05 m extrinsic error.
pub fn calibration_config(filter: FilterKind, seed: u64) -> RunConfig {
    let mut cfg = circle_config(filter, seed);
    cfg.extrinsic_error.rotation_deg = 2.0;
    cfg.extrinsic_error.translation_m = 0.05;
    cfg.initial_sigma.extrinsic_rotation = 2f64.to_radians();
    cfg.initial_sigma.extrinsic_translation = 0.05;
    cfg
}
