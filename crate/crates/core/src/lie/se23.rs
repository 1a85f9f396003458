use nalgebra::{Matrix3, Vector3};

use super::so3::{hat3, left_jacobian, left_jacobian_inv, vee3, Rot3};
use super::{Matrix5, Matrix9, MatrixLieGroup, Vector9};
use crate::error::Result;

/// Extended pose `(C, v, r)` of SE₂(3).
///
/// Embeds as the 5×5 matrix `[[C, v, r], [0, 1, 0], [0, 0, 1]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedPose {
    pub rot: Rot3,
    pub vel: Vector3<f64>,
    pub pos: Vector3<f64>,
}

/// Splits an `se₂(3)` coordinate vector into its three 3-slots.
pub(crate) fn split9(v: &Vector9) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    (
        v.fixed_rows::<3>(0).into(),
        v.fixed_rows::<3>(3).into(),
        v.fixed_rows::<3>(6).into(),
    )
}

pub(crate) fn join9(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> Vector9 {
    let mut out = Vector9::zeros();
    out.fixed_rows_mut::<3>(0).copy_from(a);
    out.fixed_rows_mut::<3>(3).copy_from(b);
    out.fixed_rows_mut::<3>(6).copy_from(c);
    out
}

impl ExtendedPose {
    pub fn new(rot: Rot3, vel: Vector3<f64>, pos: Vector3<f64>) -> Self {
        Self { rot, vel, pos }
    }

    pub fn renormalized(&self) -> Self {
        Self::new(self.rot.renormalized(), self.vel, self.pos)
    }

    /// Rotation part, `Γ(X)`.
    pub fn rotation(&self) -> Rot3 {
        self.rot
    }
}

impl MatrixLieGroup for ExtendedPose {
    type Tangent = Vector9;
    type AdMatrix = Matrix9;
    type Embedding = Matrix5;

    const DOF: usize = 9;

    fn identity() -> Self {
        Self::new(Rot3::identity(), Vector3::zeros(), Vector3::zeros())
    }

    fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rot * other.rot,
            self.rot.rotate(&other.vel) + self.vel,
            self.rot.rotate(&other.pos) + self.pos,
        )
    }

    fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Self::new(rt, -rt.rotate(&self.vel), -rt.rotate(&self.pos))
    }

    fn exp(v: &Vector9) -> Self {
        let (w, nu, rho) = split9(v);
        let j = left_jacobian(&w);
        Self::new(Rot3::exp(&w), j * nu, j * rho)
    }

    fn log(&self) -> Result<Vector9> {
        let w = self.rot.log()?;
        let jinv = left_jacobian_inv(&w);
        Ok(join9(&w, &(jinv * self.vel), &(jinv * self.pos)))
    }

    fn adjoint(&self) -> Matrix9 {
        let c = *self.rot.matrix();
        let mut m = Matrix9::zeros();
        for k in 0..3 {
            m.fixed_view_mut::<3, 3>(3 * k, 3 * k).copy_from(&c);
        }
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(hat3(&self.vel) * c));
        m.fixed_view_mut::<3, 3>(6, 0).copy_from(&(hat3(&self.pos) * c));
        m
    }

    fn ad(u: &Vector9) -> Matrix9 {
        let (w, nu, rho) = split9(u);
        let wx = hat3(&w);
        let mut m = Matrix9::zeros();
        for k in 0..3 {
            m.fixed_view_mut::<3, 3>(3 * k, 3 * k).copy_from(&wx);
        }
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&hat3(&nu));
        m.fixed_view_mut::<3, 3>(6, 0).copy_from(&hat3(&rho));
        m
    }

    fn hat(v: &Vector9) -> Matrix5 {
        let (w, nu, rho) = split9(v);
        let mut m = Matrix5::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat3(&w));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&nu);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&rho);
        m
    }

    fn vee(m: &Matrix5) -> Vector9 {
        let w = vee3(&Matrix3::from(m.fixed_view::<3, 3>(0, 0)));
        join9(
            &w,
            &m.fixed_view::<3, 1>(0, 3).into(),
            &m.fixed_view::<3, 1>(0, 4).into(),
        )
    }

    fn to_matrix(&self) -> Matrix5 {
        let mut m = Matrix5::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rot.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.vel);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.pos);
        m
    }

    fn dl(&self, u: &Vector9) -> Matrix5 {
        self.to_matrix() * Self::hat(u)
    }

    fn dr(&self, u: &Vector9) -> Matrix5 {
        Self::hat(u) * self.to_matrix()
    }
}
