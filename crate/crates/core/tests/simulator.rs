use eqf_lio::lie::{hat3, MatrixLieGroup, Pose};
use eqf_lio::measurement::{deskew, fit_plane, PlaneConfig, PoseTrack};
use eqf_lio::sim::{generate, sample_imu, PlanarWorld, SensorNoise, SimSpec, TrajectoryKind, TrajectorySpec};
use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(kind: TrajectoryKind, duration: f64) -> SimSpec {
    SimSpec {
        trajectory: TrajectorySpec {
            kind,
            duration,
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Classical RK4 on `(C, v, r)` with exact inputs evaluated at the stage times.
fn integrate_rk4(traj: &TrajectorySpec, g: &Vector3<f64>, rate: f64, duration: f64) -> (Matrix3<f64>, Vector3<f64>, Vector3<f64>) {
    let s0 = traj.truth_at(0.0, g);
    let (mut c, mut v, mut r) = (*s0.rot.matrix(), s0.vel, s0.pos);
    let h = 1.0 / rate;
    let deriv = |t: f64, c: &Matrix3<f64>, v: &Vector3<f64>| {
        let s = traj.truth_at(t, g);
        (c * hat3(&s.omega), c * s.specific_force + g, *v)
    };
    let steps = (duration * rate).round() as usize;
    for k in 0..steps {
        let t = k as f64 * h;
        let (k1c, k1v, k1r) = deriv(t, &c, &v);
        let (k2c, k2v, k2r) = deriv(t + h / 2.0, &(c + k1c * h / 2.0), &(v + k1v * h / 2.0));
        let (k3c, k3v, k3r) = deriv(t + h / 2.0, &(c + k2c * h / 2.0), &(v + k2v * h / 2.0));
        let (k4c, k4v, k4r) = deriv(t + h, &(c + k3c * h), &(v + k3v * h));
        c += (k1c + k2c * 2.0 + k3c * 2.0 + k4c) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        r += (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (h / 6.0);
    }
    (c, v, r)
}

#[test]
fn integrated_imu_reproduces_truth() {
    let g = Vector3::new(0.0, 0.0, -9.81);
    for kind in [TrajectoryKind::Circle, TrajectoryKind::Figure8] {
        let traj = spec(kind, 60.0).trajectory;
        let (c, _, r) = integrate_rk4(&traj, &g, 200.0, 60.0);
        let truth = traj.truth_at(60.0, &g);
        assert!((r - truth.pos).norm() < 1e-4, "{kind:?}: {}", (r - truth.pos).norm());
        assert!((c - truth.rot.matrix()).norm() < 1e-6);
    }
}

#[test]
fn noiseless_imu_is_exact() {
    let sp = spec(TrajectoryKind::Static, 1.0);
    let g = sp.rig.gravity();
    let truth = sp.trajectory.truth_at(0.3, &g);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ba = Vector3::new(0.1, 0.0, 0.0);
    let (w, a) = sample_imu(&truth, &Vector3::zeros(), &ba, &SensorNoise::zero(), 100.0, &mut rng);
    assert_eq!(w, Vector3::zeros());
    let expected = -truth.rot.transpose().rotate(&g) + ba;
    assert!((a - expected).norm() < 1e-12);
}

#[test]
fn gyro_noise_variance() {
    let sp = spec(TrajectoryKind::Static, 1.0);
    let truth = sp.trajectory.truth_at(0.0, &sp.rig.gravity());
    let noise = SensorNoise {
        gyro: 2e-3,
        ..SensorNoise::zero()
    };
    let rate = 200.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let mut sum = Vector3::zeros();
    let mut sq = Vector3::zeros();
    for _ in 0..n {
        let (w, _) = sample_imu(&truth, &Vector3::zeros(), &Vector3::zeros(), &noise, rate, &mut rng);
        sum += w;
        sq += w.component_mul(&w);
    }
    let expected = noise.gyro.powi(2) * rate;
    for i in 0..3 {
        let var = sq[i] / n as f64 - (sum[i] / n as f64).powi(2);
        assert!((var / expected - 1.0).abs() < 0.05, "axis {i}: {var} vs {expected}");
    }
}

#[test]
fn static_dataset_counts() {
    let ds = generate(&spec(TrajectoryKind::Static, 10.0), 3).unwrap();
    assert_eq!(ds.imu.len(), 1000);
    assert_eq!(ds.truth.len(), 1000);
    assert_eq!(ds.scans.len(), 99);
}

#[test]
fn same_seed_same_dataset() {
    let sp = spec(TrajectoryKind::Figure8, 2.0);
    assert_eq!(generate(&sp, 11).unwrap(), generate(&sp, 11).unwrap());
    assert_ne!(generate(&sp, 11).unwrap().imu, generate(&sp, 12).unwrap().imu);
}

fn truth_track(ds: &eqf_lio::sim::Dataset) -> PoseTrack {
    let mut track = PoseTrack::new();
    for r in &ds.truth {
        track.push(r.t, Pose::new(r.state.nav.rot, r.state.nav.pos));
    }
    track
}

#[test]
fn deskewed_points_lie_on_the_world() {
    let sp = spec(TrajectoryKind::SinusoidAggressive, 3.0);
    let ds = generate(&sp, 4).unwrap();
    let world = PlanarWorld::from_spec(&sp.world);
    // Dense truth poses so interpolation error stays far below the noise.
    let mut track = PoseTrack::new();
    let g = sp.rig.gravity();
    for k in 0..=30_000 {
        let t = k as f64 * 1e-4;
        let s = sp.trajectory.truth_at(t, &g);
        track.push(t, Pose::new(s.rot, s.pos));
    }
    let ext = sp.rig.extrinsic();
    let sigma = sp.noise.lidar_sigma;
    let mut total = 0;
    let mut outside = 0;
    for scan in ds.scans.iter().step_by(5) {
        let end = track.pose_at(scan.t_end).unwrap().compose(&ext);
        for p in deskew(scan, &track, &ext).unwrap() {
            total += 1;
            if world.distance(&end.transform_point(&p)) > 3.0 * sigma {
                outside += 1;
            }
        }
    }
    // Gaussian range noise leaves about 0.27% beyond 3σ.
    assert!((outside as f64) < 0.01 * total as f64, "{outside} of {total}");
}

#[test]
fn deskewed_floor_refits_one_plane() {
    let sp = spec(TrajectoryKind::Circle, 2.0);
    let ds = generate(&sp, 5).unwrap();
    let track = truth_track(&ds);
    let ext = sp.rig.extrinsic();
    let scan = &ds.scans[10];
    let end = track.pose_at(scan.t_end).unwrap().compose(&ext);
    let floor: Vec<_> = deskew(scan, &track, &ext)
        .unwrap()
        .iter()
        .map(|p| end.transform_point(p))
        .filter(|p| p.z.abs() < 0.1 && p.x.abs() < 4.0 && p.y.abs() < 3.5)
        .collect();
    assert!(floor.len() > 50);
    let fit = fit_plane(&floor, &end.trans, &PlaneConfig::default()).unwrap();
    assert!(fit.rms < 2.0 * sp.noise.lidar_sigma, "{}", fit.rms);
    assert!((fit.normal - Vector3::z()).norm() < 0.01);
}

#[test]
fn figure8_truth_velocity_is_consistent() {
    let ds = generate(&spec(TrajectoryKind::Figure8, 5.0), 6).unwrap();
    for w in ds.truth.windows(3) {
        let fd = (w[2].state.nav.pos - w[0].state.nav.pos) / (w[2].t - w[0].t);
        assert!((fd - w[1].state.nav.vel).norm() < 1e-3);
    }
}
