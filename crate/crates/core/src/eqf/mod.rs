//! Equivariant filter for the LiDAR-inertial system, plus the error-state
//! EKF baseline sharing the same interface.

pub mod config;
pub mod ekf;
pub mod filter;
pub mod gravity;
pub mod kalman;
pub mod linearization;
pub mod oracle;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::lie::{hat3, left_jacobian, ExtendedPose, MatrixLieGroup, Rot3};
use crate::measurement::PlaneObservation;
use crate::symmetry::SystemState;

pub use config::{FilterConfig, InitialSigma, NoiseConfig};
pub use ekf::ErrorStateEkf;
pub use filter::EqFilter;
pub use gravity::{build_bg, s2_boxminus, s2_boxplus, GravityDir, STANDARD_GRAVITY};
pub use linearization::{build_f, ExtrinsicCoupling, LinearizationOptions};

/// Largest IMU step accepted by `propagate`.
pub const MAX_DT: f64 = 0.1;

/// `∫₀¹∫₀^σ exp(τ θ^∧) dτ dσ`.
fn double_integral_jacobian(theta: &Vector3<f64>) -> Matrix3<f64> {
    let a = theta.norm();
    let w = hat3(theta);
    let (c1, c2) = if a < 1e-4 {
        (1.0 / 6.0 - a * a / 120.0, 1.0 / 24.0 - a * a / 720.0)
    } else {
        ((a - a.sin()) / a.powi(3), (0.5 * a * a + a.cos() - 1.0) / a.powi(4))
    };
    Matrix3::identity() * 0.5 + w * c1 + w * w * c2
}

/// Exact flow of the navigation kinematics over `dt` with the bias-corrected
/// inputs held constant: body rate `omega`, specific force `accel` and
/// virtual velocity `vel_input`.
pub fn integrate_nav(
    nav: &ExtendedPose,
    omega: &Vector3<f64>,
    accel: &Vector3<f64>,
    vel_input: &Vector3<f64>,
    gravity: &Vector3<f64>,
    dt: f64,
) -> ExtendedPose {
    let theta = omega * dt;
    let jl = left_jacobian(&theta);
    let dv = jl * accel * dt;
    let dp = jl * vel_input * dt + double_integral_jacobian(&theta) * accel * (dt * dt);
    ExtendedPose::new(
        nav.rot.compose(&Rot3::exp(&theta)),
        nav.vel + gravity * dt + nav.rot.rotate(&dv),
        nav.pos + nav.vel * dt + gravity * (0.5 * dt * dt) + nav.rot.rotate(&dp),
    )
}

/// Outcome of one scan update.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateReport {
    /// Rows used in the final iteration.
    pub rows: usize,
    /// Observations dropped by the gate or plane validity in the final iteration.
    pub rejected: usize,
    pub iterations: usize,
    pub condition: f64,
}

/// Common interface of the equivariant filter and the EKF baseline.
pub trait LioFilter: Send {
    fn name(&self) -> &'static str;

    /// Integrates one IMU interval of length `dt` with the given readings.
    fn propagate(&mut self, gyro: &Vector3<f64>, accel: &Vector3<f64>, dt: f64) -> Result<()>;

    /// Iterated scan update. `associate` is called with the current iterate and
    /// returns the plane matches to linearize about it.
    fn update(
        &mut self,
        associate: &mut dyn FnMut(&SystemState) -> Result<Vec<PlaneObservation>>,
    ) -> Result<UpdateReport>;

    fn state(&self) -> SystemState;

    /// Gravity vector in the world frame as currently estimated.
    fn gravity(&self) -> Vector3<f64>;

    fn covariance(&self) -> &DMatrix<f64>;

    fn error_dim(&self) -> usize;

    /// Normalized estimation error squared of `truth` in the filter's own
    /// error coordinates.
    fn nees(&self, truth: &SystemState, gravity: &Vector3<f64>) -> Result<f64>;
}

pub(crate) fn check_step(gyro: &Vector3<f64>, accel: &Vector3<f64>, dt: f64) -> Result<()> {
    if !dt.is_finite() || dt <= 0.0 || dt > MAX_DT {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !gyro.iter().chain(accel.iter()).all(|x| x.is_finite()) {
        return Err(Error::NonFiniteInput("IMU sample"));
    }
    Ok(())
}

/// `eᵀ Σ⁻¹ e` via Cholesky.
pub(crate) fn mahalanobis(cov: &DMatrix<f64>, e: &DVector<f64>) -> Result<f64> {
    let chol = cov
        .clone()
        .cholesky()
        .ok_or(Error::SingularInnovation(f64::INFINITY))?;
    Ok(e.dot(&chol.solve(e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fine explicit integration of the navigation kinematics.
    fn reference(nav: &ExtendedPose, w: &Vector3<f64>, a: &Vector3<f64>, mu: &Vector3<f64>, g: &Vector3<f64>, dt: f64) -> ExtendedPose {
        let n = 20_000;
        let h = dt / n as f64;
        let (mut rot, mut vel, mut pos) = (nav.rot, nav.vel, nav.pos);
        for _ in 0..n {
            // Midpoint rule on the rotation for second-order accuracy.
            let mid = rot.compose(&Rot3::exp(&(w * (0.5 * h))));
            let acc = mid.rotate(a) + g;
            pos += (vel + acc * (0.5 * h) + mid.rotate(mu)) * h;
            vel += acc * h;
            rot = rot.compose(&Rot3::exp(&(w * h)));
        }
        ExtendedPose::new(rot, vel, pos)
    }

    #[test]
    fn integrate_nav_matches_fine_integration() {
        let nav = ExtendedPose::new(
            Rot3::from_euler_zyx(0.4, -0.2, 0.3),
            Vector3::new(1.0, -0.5, 0.2),
            Vector3::new(2.0, 1.0, -1.0),
        );
        let g = Vector3::new(0.0, 0.0, -9.81);
        for (w, dt) in [(Vector3::new(0.8, -1.2, 2.0), 0.05), (Vector3::new(1e-7, 0.0, -1e-7), 0.01)] {
            let a = Vector3::new(0.3, 9.5, -1.0);
            let mu = Vector3::new(0.05, 0.0, -0.02);
            let got = integrate_nav(&nav, &w, &a, &mu, &g, dt);
            let want = reference(&nav, &w, &a, &mu, &g, dt);
            assert!((got.rot.matrix() - want.rot.matrix()).amax() < 1e-9);
            assert!((got.vel - want.vel).amax() < 1e-8);
            assert!((got.pos - want.pos).amax() < 1e-8);
        }
    }
}
