//! Gravity direction on the sphere S² and its minimal 2-dim error.

use nalgebra::{Matrix3x2, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::lie::{MatrixLieGroup, Rot3};

/// Standard gravity magnitude.
pub const STANDARD_GRAVITY: f64 = 9.81;

const ANTIPODE_MARGIN: f64 = 1e-9;

/// Unit direction on S² plus a magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GravityDir {
    dir: Vector3<f64>,
    pub magnitude: f64,
}

impl GravityDir {
    /// Normalizes `v`; the magnitude is kept separately.
    pub fn new(v: Vector3<f64>, magnitude: f64) -> Self {
        Self {
            dir: v.normalize(),
            magnitude,
        }
    }

    pub fn unit(v: Vector3<f64>) -> Self {
        Self::new(v, 1.0)
    }

    pub fn dir(&self) -> &Vector3<f64> {
        &self.dir
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.dir * self.magnitude
    }
}

/// The 3×2 isometry from `T_g S²` coordinates to rotation vectors.
pub fn build_bg(g: &GravityDir) -> Result<Matrix3x2<f64>> {
    let (x, y, z) = (g.dir.x, g.dir.y, g.dir.z);
    if z <= -1.0 + ANTIPODE_MARGIN {
        return Err(Error::AntipodeSingularity(z));
    }
    let k = 1.0 / (1.0 + z);
    Ok(Matrix3x2::new(
        1.0 - x * x * k,
        -x * y * k,
        -x * y * k,
        1.0 - y * y * k,
        -x,
        -y,
    ))
}

/// `exp((B_g x)^∧) g`.
pub fn s2_boxplus(g: &GravityDir, x: &Vector2<f64>) -> Result<GravityDir> {
    let w = build_bg(g)? * x;
    Ok(GravityDir {
        dir: Rot3::exp(&w).rotate(&g.dir),
        magnitude: g.magnitude,
    })
}

/// Minimal error `x` with `s2_boxplus(from, x) = to`.
///
/// The rotation axis `from × to` is normalized so that `‖x‖` equals the
/// angle between the two directions.
pub fn s2_boxminus(from: &GravityDir, to: &GravityDir) -> Result<Vector2<f64>> {
    let cos = from.dir.dot(&to.dir);
    if cos <= -1.0 + ANTIPODE_MARGIN {
        return Err(Error::AntipodalPair);
    }
    let cross = from.dir.cross(&to.dir);
    let sin = cross.norm();
    let theta = sin.atan2(cos);
    let scale = if theta < 1e-8 { 1.0 + theta * theta / 6.0 } else { theta / sin };
    Ok(build_bg(from)?.transpose() * (cross * scale))
}
