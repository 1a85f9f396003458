use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::{MatrixLieGroup, ORTHONORMAL_TOL, SMALL_ANGLE};
use crate::error::{Error, Result};

/// Rotations closer than this to `π` are outside the principal log branch.
const PI_MARGIN: f64 = 1e-6;

pub fn hat3(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn vee3(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Left Jacobian of SO(3), `Σ (ω^∧)^k / (k+1)!`.
pub fn left_jacobian(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
            1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0,
        )
    } else {
        let half = 0.5 * theta;
        (
            2.0 * half.sin().powi(2) / theta2,
            (theta - theta.sin()) / (theta2 * theta),
        )
    };
    let k = hat3(w);
    Matrix3::identity() + k * a + k * k * b
}

pub fn left_jacobian_inv(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let c = if theta < SMALL_ANGLE {
        1.0 / 12.0 + theta2 / 720.0 + theta2 * theta2 / 30240.0
    } else {
        1.0 / theta2 - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    let k = hat3(w);
    Matrix3::identity() - k * 0.5 + k * k * c
}

/// Element of SO(3) stored as its 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rot3(Matrix3<f64>);

impl Rot3 {
    /// Wraps a matrix without checking orthonormality.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Projects an arbitrary matrix onto the nearest rotation (polar factor).
    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        Self(m).orthonormalized()
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn about_x(angle: f64) -> Self {
        Self::exp(&Vector3::new(angle, 0.0, 0.0))
    }

    pub fn about_y(angle: f64) -> Self {
        Self::exp(&Vector3::new(0.0, angle, 0.0))
    }

    pub fn about_z(angle: f64) -> Self {
        Self::exp(&Vector3::new(0.0, 0.0, angle))
    }

    /// Rotation from yaw/pitch/roll (`Rz(yaw)·Ry(pitch)·Rx(roll)`).
    pub fn from_euler_zyx(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self(Self::about_z(yaw).0 * Self::about_y(pitch).0 * Self::about_x(roll).0)
    }

    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).norm()
    }

    /// Nearest rotation in the Frobenius sense.
    pub fn orthonormalized(&self) -> Self {
        let svd = self.0.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * vt;
        if r.determinant() < 0.0 {
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * vt;
        }
        Self(r)
    }

    /// Re-orthonormalizes only when drift exceeds [`ORTHONORMAL_TOL`].
    pub fn renormalized(&self) -> Self {
        if self.orthonormality_error() > ORTHONORMAL_TOL {
            self.orthonormalized()
        } else {
            *self
        }
    }

    pub fn angle(&self) -> f64 {
        let w = vee3(&(self.0 - self.0.transpose()));
        (0.5 * w.norm()).atan2(0.5 * (self.0.trace() - 1.0))
    }

    /// Unit quaternion `(w, x, y, z)` with non-negative scalar part.
    pub fn to_quaternion_wxyz(&self) -> [f64; 4] {
        let rot = nalgebra::Rotation3::from_matrix_unchecked(self.0);
        let q = nalgebra::UnitQuaternion::from_rotation_matrix(&rot);
        let s = if q.w < 0.0 { -1.0 } else { 1.0 };
        [s * q.w, s * q.i, s * q.j, s * q.k]
    }

    pub fn from_quaternion_wxyz(q: [f64; 4]) -> Self {
        let uq = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
            q[0], q[1], q[2], q[3],
        ));
        Self(*uq.to_rotation_matrix().matrix())
    }
}

impl std::ops::Mul for Rot3 {
    type Output = Rot3;
    fn mul(self, rhs: Rot3) -> Rot3 {
        Rot3(self.0 * rhs.0)
    }
}

impl MatrixLieGroup for Rot3 {
    type Tangent = Vector3<f64>;
    type AdMatrix = Matrix3<f64>;
    type Embedding = Matrix3<f64>;

    const DOF: usize = 3;

    fn identity() -> Self {
        Self(Matrix3::identity())
    }

    fn compose(&self, other: &Self) -> Self {
        Self(self.0 * other.0)
    }

    fn inverse(&self) -> Self {
        self.transpose()
    }

    fn exp(v: &Vector3<f64>) -> Self {
        let theta2 = v.norm_squared();
        let theta = theta2.sqrt();
        let k = hat3(v);
        let (a, b) = if theta < SMALL_ANGLE {
            (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
        } else {
            let half = 0.5 * theta;
            (theta.sin() / theta, 2.0 * half.sin().powi(2) / theta2)
        };
        Self(Matrix3::identity() + k * a + k * k * b)
    }

    fn log(&self) -> Result<Vector3<f64>> {
        let r = &self.0;
        let w = vee3(&(r - r.transpose()));
        let cos = 0.5 * (r.trace() - 1.0);
        let sin = 0.5 * w.norm();
        let theta = sin.atan2(cos);
        if theta > PI - PI_MARGIN {
            return Err(Error::AngleNearPi(theta));
        }
        if theta < SMALL_ANGLE {
            return Ok(w * (0.5 * (1.0 + theta * theta / 6.0)));
        }
        if theta < PI - 1e-2 {
            return Ok(w * (theta / (2.0 * sin)));
        }
        // Near π the antisymmetric part is small; read the axis from the
        // symmetric part instead and take its sign from `w`.
        let s = (r + r.transpose()) * 0.5 - Matrix3::identity() * cos;
        let d = s.diagonal();
        let i = d.imax();
        let mut axis: Vector3<f64> = s.column(i).into();
        axis /= axis.norm();
        if axis.dot(&w) < 0.0 {
            axis = -axis;
        }
        Ok(axis * theta)
    }

    fn adjoint(&self) -> Matrix3<f64> {
        self.0
    }

    fn ad(u: &Vector3<f64>) -> Matrix3<f64> {
        hat3(u)
    }

    fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
        hat3(v)
    }

    fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
        vee3(m)
    }

    fn to_matrix(&self) -> Matrix3<f64> {
        self.0
    }

    fn dl(&self, u: &Vector3<f64>) -> Matrix3<f64> {
        self.0 * hat3(u)
    }

    fn dr(&self, u: &Vector3<f64>) -> Matrix3<f64> {
        hat3(u) * self.0
    }
}
