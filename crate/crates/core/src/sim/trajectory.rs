//! Analytic trajectories with exact body rates and specific forces.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::lie::Rot3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    Static,
    #[default]
    Circle,
    Figure8,
    SinusoidAggressive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    /// Length of the run (s).
    pub duration: f64,
    /// Circle radius or figure-eight half width (m).
    pub radius: f64,
    /// Time for one loop (s).
    pub period: f64,
    /// Horizontal centre of the path (m).
    pub center: [f64; 2],
    /// Nominal height above the floor (m).
    pub height: f64,
    /// Vertical oscillation of the figure eight (m).
    pub vertical_amplitude: f64,
    /// Roll/pitch oscillation amplitude of the figure eight (deg).
    pub tilt_deg: f64,
    /// Yaw oscillation amplitude of the figure eight (deg).
    pub yaw_deg: f64,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            kind: TrajectoryKind::Circle,
            duration: 60.0,
            radius: 3.0,
            period: 20.0,
            center: [0.0, 0.0],
            height: 1.5,
            vertical_amplitude: 0.5,
            tilt_deg: 15.0,
            yaw_deg: 60.0,
        }
    }
}

/// Exact kinematics at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSample {
    pub rot: Rot3,
    pub vel: Vector3<f64>,
    pub pos: Vector3<f64>,
    /// Angular rate in the body frame (rad/s).
    pub omega: Vector3<f64>,
    /// Specific force `Cᵀ(r̈ − g)` in the body frame (m/s²).
    pub specific_force: Vector3<f64>,
    /// World-frame acceleration `r̈` (m/s²).
    pub accel_world: Vector3<f64>,
}

/// `a sin(w t + p)` with its first two derivatives.
fn sine(a: f64, w: f64, p: f64, t: f64) -> [f64; 3] {
    let (s, c) = (w * t + p).sin_cos();
    [a * s, a * w * c, -a * w * w * s]
}

/// Adds a constant to the value of a `[value, rate, accel]` triple.
fn offset(mut x: [f64; 3], c: f64) -> [f64; 3] {
    x[0] += c;
    x
}

/// Body rates of the ZYX Euler angles `(roll, pitch, yaw)` with rates.
pub fn euler_zyx_body_rates(angles: &Vector3<f64>, rates: &Vector3<f64>) -> Vector3<f64> {
    let (sr, cr) = angles.x.sin_cos();
    let (sp, cp) = angles.y.sin_cos();
    Vector3::new(
        rates.x - rates.z * sp,
        rates.y * cr + rates.z * cp * sr,
        -rates.y * sr + rates.z * cp * cr,
    )
}

impl TrajectorySpec {
    /// Position and attitude channels as `[value, d/dt, d²/dt²]` triples:
    /// `(x, y, z)` and `(roll, pitch, yaw)`.
    fn channels(&self, t: f64) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
        let [cx, cy] = self.center;
        let h = self.height;
        let w = 2.0 * PI / self.period;
        let zero = [0.0; 3];
        match self.kind {
            TrajectoryKind::Static => (
                [[cx, 0.0, 0.0], [cy, 0.0, 0.0], [h, 0.0, 0.0]],
                [
                    [2f64.to_radians(), 0.0, 0.0],
                    [(-1f64).to_radians(), 0.0, 0.0],
                    [30f64.to_radians(), 0.0, 0.0],
                ],
            ),
            TrajectoryKind::Circle => (
                [
                    offset(sine(self.radius, w, FRAC_PI_2, t), cx),
                    offset(sine(self.radius, w, 0.0, t), cy),
                    [h, 0.0, 0.0],
                ],
                [zero, zero, [w * t + FRAC_PI_2, w, 0.0]],
            ),
            TrajectoryKind::Figure8 => {
                let tilt = self.tilt_deg.to_radians();
                (
                    [
                        offset(sine(self.radius, w, 0.0, t), cx),
                        offset(sine(self.radius / 2.0, 2.0 * w, 0.0, t), cy),
                        offset(sine(self.vertical_amplitude, 2.0 * w, 0.0, t), h),
                    ],
                    [
                        sine(tilt, 2.0 * w, 0.0, t),
                        sine(tilt, 3.0 * w, 0.5, t),
                        sine(self.yaw_deg.to_radians(), w, 0.0, t),
                    ],
                )
            }
            TrajectoryKind::SinusoidAggressive => {
                // Peaks near 300 deg/s and 3 g.
                let f = 2.0 * PI;
                (
                    [
                        offset(sine(0.3, f * 1.5, 0.0, t), cx),
                        offset(sine(0.3, f * 1.3, 0.5, t), cy),
                        offset(sine(0.15, f * 1.1, 0.0, t), h),
                    ],
                    [
                        sine(0.35, f * 1.2, 0.0, t),
                        sine(0.3, f * 1.0, 1.0, t),
                        sine(0.6, f * 0.8, 0.0, t),
                    ],
                )
            }
        }
    }

    /// Exact state, body rate and specific force at `t` under gravity `g`.
    pub fn truth_at(&self, t: f64, gravity: &Vector3<f64>) -> TruthSample {
        let (p, a) = self.channels(t);
        let pos = Vector3::new(p[0][0], p[1][0], p[2][0]);
        let vel = Vector3::new(p[0][1], p[1][1], p[2][1]);
        let acc = Vector3::new(p[0][2], p[1][2], p[2][2]);
        let angles = Vector3::new(a[0][0], a[1][0], a[2][0]);
        let rates = Vector3::new(a[0][1], a[1][1], a[2][1]);
        let rot = Rot3::from_euler_zyx(angles.z, angles.y, angles.x);
        TruthSample {
            rot,
            vel,
            pos,
            omega: euler_zyx_body_rates(&angles, &rates),
            specific_force: rot.transpose().rotate(&(acc - gravity)),
            accel_world: acc,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::MatrixLieGroup;

    const G: Vector3<f64> = Vector3::new(0.0, 0.0, -9.81);

    fn spec(kind: TrajectoryKind) -> TrajectorySpec {
        TrajectorySpec {
            kind,
            ..Default::default()
        }
    }

    #[test]
    fn static_is_at_rest() {
        let s = spec(TrajectoryKind::Static).truth_at(3.0, &G);
        assert_eq!(s.vel, Vector3::zeros());
        assert_eq!(s.omega, Vector3::zeros());
        assert!((s.specific_force + s.rot.transpose().rotate(&G)).norm() < 1e-12);
    }

    #[test]
    fn circle_centripetal_acceleration() {
        let sp = spec(TrajectoryKind::Circle);
        let w = 2.0 * PI / sp.period;
        for t in [0.0, 1.3, 7.7] {
            let s = sp.truth_at(t, &G);
            assert!((s.accel_world.norm() - sp.radius * w * w).abs() < 1e-12);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        for kind in [
            TrajectoryKind::Static,
            TrajectoryKind::Circle,
            TrajectoryKind::Figure8,
            TrajectoryKind::SinusoidAggressive,
        ] {
            let sp = spec(kind);
            for t in [0.5, 4.2, 11.1] {
                let s = sp.truth_at(t, &G);
                let (a, b) = (sp.truth_at(t + h, &G), sp.truth_at(t - h, &G));
                let v_fd = (a.pos - b.pos) / (2.0 * h);
                assert!((v_fd - s.vel).norm() < 1e-6, "{kind:?} velocity");
                let acc_fd = (a.vel - b.vel) / (2.0 * h);
                assert!((acc_fd - s.accel_world).norm() < 1e-5, "{kind:?} accel");
                let w_fd = (b.rot.transpose() * a.rot).log().unwrap() / (2.0 * h);
                assert!((w_fd - s.omega).norm() < 1e-6, "{kind:?} omega");
            }
        }
    }

    #[test]
    fn aggressive_profile_peaks() {
        let sp = spec(TrajectoryKind::SinusoidAggressive);
        let (mut w_max, mut a_max) = (0.0f64, 0.0f64);
        for k in 0..20000 {
            let s = sp.truth_at(k as f64 * 1e-3, &G);
            w_max = w_max.max(s.omega.norm());
            a_max = a_max.max(s.accel_world.norm());
        }
        assert!((200.0..400.0).contains(&w_max.to_degrees()), "{}", w_max.to_degrees());
        assert!((2.0 * 9.81..4.0 * 9.81).contains(&a_max), "{a_max}");
    }
}
