use nalgebra::{Matrix3, Vector3};

use super::so3::{hat3, left_jacobian, left_jacobian_inv, vee3, Rot3};
use super::{Matrix4, Matrix6, MatrixLieGroup, Vector6};
use crate::error::Result;

/// Rigid transform `(C, l)` acting as `p ↦ C p + l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rot: Rot3,
    pub trans: Vector3<f64>,
}

impl Pose {
    pub fn new(rot: Rot3, trans: Vector3<f64>) -> Self {
        Self { rot, trans }
    }

    pub fn from_rotation(rot: Rot3) -> Self {
        Self::new(rot, Vector3::zeros())
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rot.rotate(p) + self.trans
    }

    pub fn renormalized(&self) -> Self {
        Self::new(self.rot.renormalized(), self.trans)
    }

    /// Geodesic interpolation `self · exp(s · log(self⁻¹ other))`.
    pub fn interpolate(&self, other: &Pose, s: f64) -> Result<Pose> {
        let delta = self.inverse().compose(other).log()?;
        Ok(self.compose(&Pose::exp(&(delta * s))))
    }
}

impl MatrixLieGroup for Pose {
    type Tangent = Vector6;
    type AdMatrix = Matrix6;
    type Embedding = Matrix4;

    const DOF: usize = 6;

    fn identity() -> Self {
        Self::new(Rot3::identity(), Vector3::zeros())
    }

    fn compose(&self, other: &Self) -> Self {
        Self::new(self.rot * other.rot, self.rot.rotate(&other.trans) + self.trans)
    }

    fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Self::new(rt, -rt.rotate(&self.trans))
    }

    fn exp(v: &Vector6) -> Self {
        let w: Vector3<f64> = v.fixed_rows::<3>(0).into();
        let rho: Vector3<f64> = v.fixed_rows::<3>(3).into();
        Self::new(Rot3::exp(&w), left_jacobian(&w) * rho)
    }

    fn log(&self) -> Result<Vector6> {
        let w = self.rot.log()?;
        let rho = left_jacobian_inv(&w) * self.trans;
        let mut out = Vector6::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&w);
        out.fixed_rows_mut::<3>(3).copy_from(&rho);
        Ok(out)
    }

    fn adjoint(&self) -> Matrix6 {
        let c = *self.rot.matrix();
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&c);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&c);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(hat3(&self.trans) * c));
        m
    }

    fn ad(u: &Vector6) -> Matrix6 {
        let w = hat3(&u.fixed_rows::<3>(0).into());
        let rho = hat3(&u.fixed_rows::<3>(3).into());
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&rho);
        m
    }

    fn hat(v: &Vector6) -> Matrix4 {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&hat3(&v.fixed_rows::<3>(0).into()));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&v.fixed_rows::<3>(3));
        m
    }

    fn vee(m: &Matrix4) -> Vector6 {
        let w = vee3(&Matrix3::from(m.fixed_view::<3, 3>(0, 0)));
        let mut out = Vector6::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&w);
        out.fixed_rows_mut::<3>(3).copy_from(&m.fixed_view::<3, 1>(0, 3));
        out
    }

    fn to_matrix(&self) -> Matrix4 {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rot.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.trans);
        m
    }

    fn dl(&self, u: &Vector6) -> Matrix4 {
        self.to_matrix() * Self::hat(u)
    }

    fn dr(&self, u: &Vector6) -> Matrix4 {
        Self::hat(u) * self.to_matrix()
    }
}
