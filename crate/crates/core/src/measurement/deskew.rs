use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::lie::{MatrixLieGroup, Pose};

/// Tolerance for a point time to sit outside the covered interval.
const TIME_SLACK: f64 = 1e-9;

/// A raw LiDAR return: position in the sensor frame at capture time plus its
/// offset from the start of the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub point: Vector3<f64>,
    pub t_offset: f64,
}

/// One sweep, stamped at its end time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scan {
    pub t_end: f64,
    pub period: f64,
    pub points: Vec<ScanPoint>,
}

impl Scan {
    pub fn t_start(&self) -> f64 {
        self.t_end - self.period
    }
}

/// Time-ordered body poses used for interpolation.
#[derive(Clone, Debug, Default)]
pub struct PoseTrack {
    samples: Vec<(f64, Pose)>,
}

impl PoseTrack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, pose: Pose) {
        debug_assert!(self.samples.last().is_none_or(|(last, _)| t >= *last));
        self.samples.push((t, pose));
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Drops every sample strictly before the last one at or before `t`.
    pub fn trim_before(&mut self, t: f64) {
        let keep = self.samples.partition_point(|(s, _)| *s <= t);
        if keep > 1 {
            self.samples.drain(..keep - 1);
        }
    }

    /// Geodesic interpolation in `SE(3)` between the bracketing samples.
    pub fn pose_at(&self, t: f64) -> Result<Pose> {
        let (first, last) = match (self.samples.first(), self.samples.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::MissingPoseCoverage(t)),
        };
        if t < first.0 - TIME_SLACK || t > last.0 + TIME_SLACK {
            return Err(Error::MissingPoseCoverage(t));
        }
        let i = self.samples.partition_point(|(s, _)| *s <= t);
        if i == 0 {
            return Ok(first.1);
        }
        if i == self.samples.len() {
            return Ok(last.1);
        }
        let (t0, p0) = &self.samples[i - 1];
        let (t1, p1) = &self.samples[i];
        if t1 - t0 <= 0.0 {
            return Ok(*p1);
        }
        p0.interpolate(p1, (t - t0) / (t1 - t0))
    }
}

/// Re-expresses every point of `scan` in the LiDAR frame at the end of the sweep.
///
/// `track` holds body poses; `extrinsic` is the LiDAR pose in the body frame.
pub fn deskew(scan: &Scan, track: &PoseTrack, extrinsic: &Pose) -> Result<Vec<Vector3<f64>>> {
    let end_inv = track.pose_at(scan.t_end)?.compose(extrinsic).inverse();
    let t0 = scan.t_start();
    // Points sharing a timestamp (one beam column) share the transform.
    let mut cached: Option<(f64, Pose)> = None;
    scan.points
        .iter()
        .map(|sp| {
            let rel = match cached {
                Some((t, rel)) if t == sp.t_offset => rel,
                _ => {
                    let lidar = track.pose_at(t0 + sp.t_offset)?.compose(extrinsic);
                    let rel = end_inv.compose(&lidar);
                    cached = Some((sp.t_offset, rel));
                    rel
                }
            };
            Ok(rel.transform_point(&sp.point))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{Rot3, Vector6};

    fn track_constant_twist(twist: &Vector6, t_end: f64, n: usize) -> PoseTrack {
        let mut track = PoseTrack::new();
        for i in 0..=n {
            let t = t_end * i as f64 / n as f64;
            track.push(t, Pose::exp(&(twist * t)));
        }
        track
    }

    #[test]
    fn static_sensor_is_identity() {
        let mut track = PoseTrack::new();
        let pose = Pose::new(Rot3::about_z(0.3), Vector3::new(1.0, 2.0, 3.0));
        track.push(0.0, pose);
        track.push(0.1, pose);
        let scan = Scan {
            t_end: 0.1,
            period: 0.1,
            points: (0..10)
                .map(|i| ScanPoint {
                    point: Vector3::new(i as f64, 1.0, 0.5),
                    t_offset: 0.01 * i as f64,
                })
                .collect(),
        };
        let ext = Pose::new(Rot3::about_x(0.1), Vector3::new(0.1, 0.0, 0.2));
        let out = deskew(&scan, &track, &ext).unwrap();
        for (o, sp) in out.iter().zip(&scan.points) {
            assert!((o - sp.point).norm() < 1e-12);
        }
    }

    #[test]
    fn moving_sensor_recovers_world_point() {
        let twist = Vector6::new(0.0, 0.0, 0.8, 1.0, 0.2, 0.0);
        let track = track_constant_twist(&twist, 0.1, 10);
        let ext = Pose::new(Rot3::about_y(0.05), Vector3::new(0.0, 0.1, 0.0));
        let world = Vector3::new(5.0, -2.0, 1.0);
        let points = (0..20)
            .map(|i| {
                let t = 0.005 * i as f64;
                let lidar = Pose::exp(&(twist * t)).compose(&ext);
                ScanPoint {
                    point: lidar.inverse().transform_point(&world),
                    t_offset: t,
                }
            })
            .collect();
        let scan = Scan {
            t_end: 0.1,
            period: 0.1,
            points,
        };
        let end = Pose::exp(&(twist * 0.1)).compose(&ext);
        let expected = end.inverse().transform_point(&world);
        for p in deskew(&scan, &track, &ext).unwrap() {
            assert!((p - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn missing_coverage() {
        let mut track = PoseTrack::new();
        track.push(0.05, Pose::identity());
        track.push(0.1, Pose::identity());
        let scan = Scan {
            t_end: 0.1,
            period: 0.1,
            points: vec![ScanPoint {
                point: Vector3::x(),
                t_offset: 0.0,
            }],
        };
        assert!(matches!(
            deskew(&scan, &track, &Pose::identity()),
            Err(Error::MissingPoseCoverage(_))
        ));
    }
}
