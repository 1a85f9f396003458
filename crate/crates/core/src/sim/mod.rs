//! Synthetic IMU/LiDAR datasets with known ground truth.

pub mod trajectory;
pub mod world;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{ExtendedPose, MatrixLieGroup, Pose, Rot3, Vector9};
use crate::measurement::{Scan, ScanPoint};
use crate::symmetry::SystemState;

pub use trajectory::{TrajectoryKind, TrajectorySpec, TruthSample};
pub use world::{LidarSpec, PlanarWorld, Rect, WorldSpec};

/// One IMU reading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub gyro: Vector3<f64>,
    pub accel: Vector3<f64>,
}

/// Ground-truth state at one IMU time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthRecord {
    pub t: f64,
    pub state: SystemState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigSpec {
    pub imu_rate: f64,
    pub lidar_rate: f64,
    pub gravity: [f64; 3],
    /// LiDAR orientation in the body frame as roll, pitch, yaw (deg).
    pub extrinsic_rpy_deg: [f64; 3],
    /// LiDAR position in the body frame (m).
    pub extrinsic_translation: [f64; 3],
    /// Initial gyroscope bias (rad/s).
    pub gyro_bias: [f64; 3],
    /// Initial accelerometer bias (m/s²).
    pub accel_bias: [f64; 3],
}

impl Default for RigSpec {
    fn default() -> Self {
        Self {
            imu_rate: 100.0,
            lidar_rate: 10.0,
            gravity: [0.0, 0.0, -9.81],
            extrinsic_rpy_deg: [1.0, -2.0, 3.0],
            extrinsic_translation: [0.1, -0.05, 0.08],
            gyro_bias: [0.01, -0.01, 0.02],
            accel_bias: [0.05, 0.0, -0.05],
        }
    }
}

impl RigSpec {
    pub fn extrinsic(&self) -> Pose {
        let [r, p, y] = self.extrinsic_rpy_deg.map(f64::to_radians);
        Pose::new(Rot3::from_euler_zyx(y, p, r), Vector3::from(self.extrinsic_translation))
    }

    pub fn gravity(&self) -> Vector3<f64> {
        Vector3::from(self.gravity)
    }
}

/// Sensor noise densities used by the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoise {
    /// (rad/s)/√Hz
    pub gyro: f64,
    /// (m/s²)/√Hz
    pub accel: f64,
    /// (rad/s²)/√Hz
    pub gyro_bias_walk: f64,
    /// (m/s³)/√Hz
    pub accel_bias_walk: f64,
    /// Range noise (m, one sigma).
    pub lidar_sigma: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            gyro: 1e-3,
            accel: 1e-2,
            gyro_bias_walk: 1e-5,
            accel_bias_walk: 1e-4,
            lidar_sigma: 0.02,
        }
    }
}

impl SensorNoise {
    pub fn zero() -> Self {
        Self {
            gyro: 0.0,
            accel: 0.0,
            gyro_bias_walk: 0.0,
            accel_bias_walk: 0.0,
            lidar_sigma: 0.0,
        }
    }
}

/// Everything needed to generate a dataset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub trajectory: TrajectorySpec,
    pub rig: RigSpec,
    pub noise: SensorNoise,
    pub lidar: LidarSpec,
    pub world: WorldSpec,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        let t = &self.trajectory;
        let positive = [
            ("trajectory.duration", t.duration),
            ("trajectory.period", t.period),
            ("rig.imu_rate", self.rig.imu_rate),
            ("rig.lidar_rate", self.rig.lidar_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.rig.lidar_rate > self.rig.imu_rate {
            return Err(Error::Config("rig.lidar_rate cannot exceed rig.imu_rate".into()));
        }
        let n = &self.noise;
        for v in [n.gyro, n.accel, n.gyro_bias_walk, n.accel_bias_walk, n.lidar_sigma] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidNoise(v));
            }
        }
        let g = self.rig.gravity();
        if !(g.norm() > 0.0) || !g.iter().all(|x| x.is_finite()) {
            return Err(Error::Config("rig.gravity must be a finite non-zero vector".into()));
        }
        Ok(())
    }

    /// Number of IMU samples: one per period over `[0, duration)`.
    pub fn imu_count(&self) -> usize {
        (self.trajectory.duration * self.rig.imu_rate).round() as usize
    }
}

/// A generated dataset held in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub spec: SimSpec,
    pub seed: u64,
    pub imu: Vec<ImuSample>,
    pub truth: Vec<TruthRecord>,
    pub scans: Vec<Scan>,
}

impl Dataset {
    /// Truth at an IMU time, by exact lookup of the nearest record.
    pub fn truth_near(&self, t: f64) -> Option<&TruthRecord> {
        let i = self.truth.partition_point(|r| r.t < t);
        let candidates = [i.checked_sub(1), Some(i)];
        candidates
            .into_iter()
            .flatten()
            .filter_map(|k| self.truth.get(k))
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

fn normal3<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    Vector3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// IMU measurement of `truth` with the given biases and white noise drawn
/// at discrete standard deviation `density · √rate`.
pub fn sample_imu<R: Rng + ?Sized>(
    truth: &TruthSample,
    gyro_bias: &Vector3<f64>,
    accel_bias: &Vector3<f64>,
    noise: &SensorNoise,
    rate: f64,
    rng: &mut R,
) -> (Vector3<f64>, Vector3<f64>) {
    let s = rate.sqrt();
    let gyro = truth.omega + gyro_bias + normal3(rng) * (noise.gyro * s);
    let accel = truth.specific_force + accel_bias + normal3(rng) * (noise.accel * s);
    (gyro, accel)
}

/// One grid sweep ending at `t_end`. Beam `i` of `n` fires at
/// `t_end − period + period · i / n` from the true LiDAR pose at that time.
pub fn raycast_scan<R: Rng + ?Sized>(
    spec: &SimSpec,
    world: &PlanarWorld,
    directions: &[Vector3<f64>],
    t_end: f64,
    rng: &mut R,
) -> Scan {
    let period = 1.0 / spec.rig.lidar_rate;
    let gravity = spec.rig.gravity();
    let ext = spec.rig.extrinsic();
    let n = directions.len();
    let mut points = Vec::with_capacity(n);
    for (i, d) in directions.iter().enumerate() {
        let t_offset = period * i as f64 / n as f64;
        let truth = spec.trajectory.truth_at(t_end - period + t_offset, &gravity);
        let lidar = Pose::new(truth.rot, truth.pos).compose(&ext);
        let origin = lidar.trans;
        let dir_w = lidar.rot.rotate(d);
        let noise: f64 = rng.sample(StandardNormal);
        if let Some(range) = world.cast(&origin, &dir_w, spec.lidar.min_range, spec.lidar.max_range) {
            points.push(ScanPoint {
                point: d * (range + spec.noise.lidar_sigma * noise),
                t_offset,
            });
        }
    }
    Scan {
        t_end,
        period,
        points,
    }
}

/// Generates the full dataset. IMU noise and bias walks use stream 0 of the
/// seeded generator and LiDAR noise uses stream 1.
pub fn generate(spec: &SimSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut imu_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lidar_rng = ChaCha8Rng::seed_from_u64(seed);
    lidar_rng.set_stream(1);

    let gravity = spec.rig.gravity();
    let ext = spec.rig.extrinsic();
    let rate = spec.rig.imu_rate;
    let dt = 1.0 / rate;
    let mut bg = Vector3::from(spec.rig.gyro_bias);
    let mut ba = Vector3::from(spec.rig.accel_bias);
    let count = spec.imu_count();
    let mut imu = Vec::with_capacity(count);
    let mut truth = Vec::with_capacity(count);
    for k in 0..count {
        let t = k as f64 / rate;
        let s = spec.trajectory.truth_at(t, &gravity);
        let mut bias = Vector9::zeros();
        bias.fixed_rows_mut::<3>(0).copy_from(&bg);
        bias.fixed_rows_mut::<3>(3).copy_from(&ba);
        truth.push(TruthRecord {
            t,
            state: SystemState::new(ExtendedPose::new(s.rot, s.vel, s.pos), bias, ext),
        });
        let (gyro, accel) = sample_imu(&s, &bg, &ba, &spec.noise, rate, &mut imu_rng);
        imu.push(ImuSample { t, gyro, accel });
        bg += normal3(&mut imu_rng) * (spec.noise.gyro_bias_walk * dt.sqrt());
        ba += normal3(&mut imu_rng) * (spec.noise.accel_bias_walk * dt.sqrt());
    }

    let world = PlanarWorld::from_spec(&spec.world);
    let directions = spec.lidar.directions();
    let last_t = imu.last().map_or(0.0, |s| s.t);
    let mut scans = Vec::new();
    for j in 1.. {
        let t_end = j as f64 / spec.rig.lidar_rate;
        if t_end > last_t + 1e-9 {
            break;
        }
        scans.push(raycast_scan(spec, &world, &directions, t_end, &mut lidar_rng));
    }
    Ok(Dataset {
        spec: spec.clone(),
        seed,
        imu,
        truth,
        scans,
    })
}
