//! The full LiDAR-inertial loop over a dataset.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eqf::{EqFilter, ErrorStateEkf, ExtrinsicCoupling, FilterConfig, InitialSigma, LioFilter, NoiseConfig};
use crate::error::{Error, Result};
use crate::lie::{MatrixLieGroup, Pose, Rot3};
use crate::measurement::{associate, deskew, AssociationConfig, ExtrinsicRowForm, MapConfig, MapIndex, PlaneConfig, PoseTrack};
use crate::samples::random_in_ball;
use crate::sim::Dataset;
use crate::symmetry::SystemState;

use super::metrics::{compute_metrics, Epoch, MetricsReport};

/// Position error that aborts a run.
pub const DIVERGENCE_LIMIT: f64 = 100.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    #[default]
    Eqf,
    Ekf,
}

/// Error injected into the initial estimate. Directions are drawn from the
/// run seed; magnitudes are fixed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Perturbation {
    pub attitude_deg: f64,
    pub position_m: f64,
    pub velocity_mps: f64,
    /// Initial gyroscope bias estimate (rad/s).
    pub gyro_bias: [f64; 3],
    /// Initial accelerometer bias estimate (m/s²).
    pub accel_bias: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtrinsicError {
    pub rotation_deg: f64,
    pub translation_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    /// Voxel edge for down-sampling each de-skewed scan (m).
    pub scan_voxel: f64,
    /// Occupancy voxel edge of the map (m).
    pub map_voxel: f64,
    pub neighbors: usize,
    pub max_neighbor_distance: f64,
    pub plane_max_distance: f64,
    pub plane_max_rms: f64,
    pub plane_min_aspect: f64,
    /// Multiplies every row variance.
    pub noise_inflation: f64,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            scan_voxel: 1.5,
            map_voxel: 0.5,
            neighbors: 5,
            max_neighbor_distance: 1.0,
            plane_max_distance: 0.05,
            plane_max_rms: 0.03,
            plane_min_aspect: 0.2,
            noise_inflation: 1.0,
        }
    }
}

/// Alternative closed forms and discretization switches.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizationConfig {
    pub extrinsic_coupling: ExtrinsicCoupling,
    pub extrinsic_row: ExtrinsicRowForm,
    pub exact_transition: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset directory; relative paths resolve against the config file.
    pub dataset: PathBuf,
    pub filter: FilterKind,
    pub seed: u64,
    pub max_iter: usize,
    pub estimate_gravity: bool,
    /// Innovation gate (m).
    pub gate: f64,
    /// Per-row chi-square gate (predicted variances); zero disables it.
    pub chi2_gate: f64,
    pub noise: NoiseConfig,
    pub initial_sigma: InitialSigma,
    pub perturbation: Perturbation,
    pub extrinsic_error: ExtrinsicError,
    pub mapping: MappingConfig,
    pub linearization: LinearizationConfig,
    /// Include wall-clock time per scan in the report (not reproducible).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            filter: FilterKind::Eqf,
            seed: 0,
            max_iter: 2,
            estimate_gravity: false,
            gate: 1.0,
            chi2_gate: 9.0,
            noise: NoiseConfig::default(),
            initial_sigma: InitialSigma::default(),
            perturbation: Perturbation::default(),
            extrinsic_error: ExtrinsicError::default(),
            mapping: MappingConfig::default(),
            linearization: LinearizationConfig::default(),
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            noise: self.noise.clone(),
            initial: self.initial_sigma.clone(),
            max_iterations: self.max_iter,
            gate: self.gate,
            chi2_gate: self.chi2_gate,
            estimate_gravity: self.estimate_gravity,
            exact_transition: self.linearization.exact_transition,
            extrinsic_coupling: self.linearization.extrinsic_coupling,
            extrinsic_row: self.linearization.extrinsic_row,
            ..Default::default()
        }
    }

    pub fn association(&self) -> AssociationConfig {
        AssociationConfig {
            neighbors: self.mapping.neighbors,
            max_neighbor_distance: self.mapping.max_neighbor_distance,
            plane: PlaneConfig {
                max_point_distance: self.mapping.plane_max_distance,
                max_rms: self.mapping.plane_max_rms,
                min_aspect: self.mapping.plane_min_aspect,
            },
            gate: self.gate,
            lidar_sigma: self.noise.lidar_sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filter_config().validate()?;
        let m = &self.mapping;
        if m.neighbors < 3 {
            return Err(Error::Config("mapping.neighbors must be at least 3".into()));
        }
        if !(m.noise_inflation > 0.0) {
            return Err(Error::Config("mapping.noise_inflation must be positive".into()));
        }
        let p = &self.perturbation;
        let finite = [p.attitude_deg, p.position_m, p.velocity_mps, self.extrinsic_error.rotation_deg, self.extrinsic_error.translation_m]
            .into_iter()
            .chain(p.gyro_bias)
            .chain(p.accel_bias)
            .all(f64::is_finite);
        if !finite {
            return Err(Error::Config("perturbation values must be finite".into()));
        }
        Ok(())
    }
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    /// Initial estimate followed by the estimate after each scan.
    pub estimates: Vec<(f64, SystemState)>,
    pub epochs: Vec<Epoch>,
    pub report: MetricsReport,
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v: Vector3<f64> = random_in_ball(rng, 1.0);
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

/// Initial estimate: truth with the configured errors applied.
pub fn initial_estimate(truth: &SystemState, config: &RunConfig) -> SystemState {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let p = &config.perturbation;
    let mut xi = *truth;
    xi.nav.rot = Rot3::exp(&(random_direction(&mut rng) * p.attitude_deg.to_radians())) * xi.nav.rot;
    xi.nav.pos += random_direction(&mut rng) * p.position_m;
    xi.nav.vel += random_direction(&mut rng) * p.velocity_mps;
    xi.bias = Default::default();
    xi.bias.fixed_rows_mut::<3>(0).copy_from(&Vector3::from(p.gyro_bias));
    xi.bias.fixed_rows_mut::<3>(3).copy_from(&Vector3::from(p.accel_bias));
    let e = &config.extrinsic_error;
    let rot_err = Rot3::exp(&(random_direction(&mut rng) * e.rotation_deg.to_radians()));
    xi.ext = Pose::new(xi.ext.rot * rot_err, xi.ext.trans + random_direction(&mut rng) * e.translation_m);
    xi
}

fn body_pose(xi: &SystemState) -> Pose {
    Pose::new(xi.nav.rot, xi.nav.pos)
}

/// Keeps the first point of each occupied voxel, in input order.
pub fn voxel_downsample(points: &[Vector3<f64>], voxel: f64) -> Vec<Vector3<f64>> {
    if voxel <= 0.0 {
        return points.to_vec();
    }
    let mut seen = std::collections::HashSet::new();
    points
        .iter()
        .filter(|p| seen.insert([(p.x / voxel).floor() as i64, (p.y / voxel).floor() as i64, (p.z / voxel).floor() as i64]))
        .copied()
        .collect()
}

fn make_filter(kind: FilterKind, xi0: &SystemState, gravity: Vector3<f64>, config: FilterConfig) -> Result<Box<dyn LioFilter>> {
    Ok(match kind {
        FilterKind::Eqf => Box::new(EqFilter::new(xi0, gravity, config)?),
        FilterKind::Ekf => Box::new(ErrorStateEkf::new(xi0, gravity, config)?),
    })
}

/// Runs the filter over an in-memory dataset.
///
/// The world frame is the ground-truth frame: the first scan is de-skewed and
/// registered with the true poses to seed the map. Every later scan is
/// de-skewed with filter-predicted poses, used for an iterated update and
/// then added to the map at the corrected pose.
pub fn run_dataset(ds: &Dataset, config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    if ds.imu.len() < 2 || ds.truth.len() != ds.imu.len() {
        return Err(Error::DatasetCorrupt("dataset needs at least two IMU samples with matching truth".into()));
    }
    let gravity = ds.spec.rig.gravity();
    let truth_ext = ds.spec.rig.extrinsic();
    let xi0 = initial_estimate(&ds.truth[0].state, config);
    let mut filter = make_filter(config.filter, &xi0, gravity, config.filter_config())?;
    let assoc = config.association();
    let inflation = config.mapping.noise_inflation;
    let mut map = MapIndex::new(MapConfig {
        voxel_size: config.mapping.map_voxel,
        ..Default::default()
    });

    let mut estimates = vec![(ds.imu[0].t, filter.state())];
    let mut epochs = Vec::with_capacity(ds.scans.len());
    let mut track = PoseTrack::new();
    track.push(ds.imu[0].t, body_pose(&filter.state()));
    let mut truth_track = PoseTrack::new();
    truth_track.push(ds.truth[0].t, body_pose(&ds.truth[0].state));
    let mut next_scan = 0;
    let mut update_ms = 0.0;

    for k in 0..ds.imu.len() - 1 {
        let (a, b) = (&ds.imu[k], &ds.imu[k + 1]);
        let gyro = (a.gyro + b.gyro) * 0.5;
        let accel = (a.accel + b.accel) * 0.5;
        filter.propagate(&gyro, &accel, b.t - a.t)?;
        track.push(b.t, body_pose(&filter.state()));
        let truth = &ds.truth[k + 1];
        if next_scan == 0 {
            truth_track.push(truth.t, body_pose(&truth.state));
        }

        while next_scan < ds.scans.len() && ds.scans[next_scan].t_end <= b.t + 1e-9 {
            let scan = &ds.scans[next_scan];
            next_scan += 1;
            if (scan.t_end - b.t).abs() > 1e-6 {
                return Err(Error::DatasetCorrupt(format!("scan end {} is not on the IMU grid", scan.t_end)));
            }
            let started = Instant::now();
            if map.is_empty() {
                let end = body_pose(&truth.state).compose(&truth_ext);
                let pts = deskew(scan, &truth_track, &truth_ext)?;
                let world: Vec<_> = pts.iter().map(|p| end.transform_point(p)).collect();
                map.insert(&world)?;
            } else {
                let ext = filter.state().ext;
                let pts = voxel_downsample(&deskew(scan, &track, &ext)?, config.mapping.scan_voxel);
                let mut matcher = |xi: &SystemState| {
                    let mut obs = associate(&map, xi, &pts, &assoc)?;
                    for o in &mut obs {
                        o.variance *= inflation;
                    }
                    Ok(obs)
                };
                let report = match filter.update(&mut matcher) {
                    Ok(r) => Some(r),
                    Err(Error::NoMeasurements) => None,
                    Err(e) => return Err(e),
                };
                let xi = filter.state();
                let end = body_pose(&xi).compose(&xi.ext);
                let full = deskew(scan, &track, &xi.ext)?;
                let world: Vec<_> = full.iter().map(|p| end.transform_point(p)).collect();
                map.insert(&world)?;
                epochs.push(Epoch {
                    t: scan.t_end,
                    truth: truth.state,
                    estimate: xi,
                    nees: filter.nees(&truth.state, &gravity)?,
                    bias_covariance: bias_covariance(filter.as_ref()),
                    rows: report.map_or(0, |r| r.rows),
                });
            }
            update_ms += started.elapsed().as_secs_f64() * 1e3;
            let xi = filter.state();
            let err = (xi.nav.pos - truth.state.nav.pos).norm();
            if !err.is_finite() || err > DIVERGENCE_LIMIT {
                return Err(Error::FilterDiverged { t: scan.t_end, error: err });
            }
            estimates.push((scan.t_end, xi));
            track.clear();
            track.push(b.t, body_pose(&xi));
        }
    }
    if next_scan != ds.scans.len() {
        return Err(Error::DatasetCorrupt(format!("{} scans end after the last IMU sample", ds.scans.len() - next_scan)));
    }
    let timing = config.timing.then(|| update_ms / ds.scans.len().max(1) as f64);
    let report = compute_metrics(filter.name(), filter.error_dim(), &epochs, timing)?;
    Ok(RunOutput { estimates, epochs, report })
}

/// Covariance of the physical gyro and accelerometer biases (body frame).
fn bias_covariance(filter: &dyn LioFilter) -> nalgebra::Matrix6<f64> {
    let cov = filter.covariance();
    if filter.name() == "ekf" {
        return cov.fixed_view::<6, 6>(9, 9).into();
    }
    // Error bias block is J (b − b̂) with J = [[C, 0], [v^∧ C, C]].
    let xi = filter.state();
    let c: Matrix3<f64> = *xi.nav.rot.matrix();
    let mut j_inv = nalgebra::Matrix6::zeros();
    j_inv.fixed_view_mut::<3, 3>(0, 0).copy_from(&c.transpose());
    j_inv.fixed_view_mut::<3, 3>(3, 3).copy_from(&c.transpose());
    j_inv
        .fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(-c.transpose() * crate::lie::hat3(&xi.nav.vel)));
    let block: nalgebra::Matrix6<f64> = cov.fixed_view::<6, 6>(9, 9).into();
    j_inv * block * j_inv.transpose()
}
