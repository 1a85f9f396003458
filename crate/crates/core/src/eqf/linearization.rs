//! Error coordinates at the fixed origin and the closed-form state matrix.
//!
//! The error of an estimate `X̂` against a state `ξ` is `e = φ(X̂⁻¹, ξ)`,
//! read in the chart `ε = (log e_T, e_b, log e_K)` at `ξ⁰`. Coordinates are
//! ordered `[nav (θ, ν, ρ) | bias (g, a, μ) | extrinsic (θ, l)]`.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::error::Result;
use crate::lie::{hat3, ExtendedPose, MatrixLieGroup, Pose};
use crate::symmetry::{
    action_phi, transport, GroupElement, SystemInput, SystemState, TangentTriple, Vector24,
};

pub type Matrix24 = SMatrix<f64, 24, 24>;
/// Maps the 21 process-noise channels into error coordinates.
pub type NoiseInput = SMatrix<f64, 24, 21>;

/// How the off-diagonal block of the extrinsic part of `F` is filled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrinsicCoupling {
    /// Zero block: the linearization of the lift with `Γ(Λ₁) = (ω^∧, 0)`.
    #[default]
    Derived,
    /// The printed form that repeats `Z` below the diagonal.
    PrintedZ,
}

/// Variants of the closed-form linearization. The defaults are the
/// oracle-consistent forms; the others exist for comparison and mutation
/// testing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LinearizationOptions {
    pub extrinsic_coupling: ExtrinsicCoupling,
    /// Negates the `g^∧` block of `F_T`.
    pub flip_gravity_block: bool,
}

/// `ξ⁰`-chart inverse: `(exp ε_T, ε_b, exp ε_K)`.
pub fn chart_inverse(eps: &Vector24) -> SystemState {
    let t = TangentTriple::from_vector(eps);
    SystemState::new(ExtendedPose::exp(&t.nav), t.bias, Pose::exp(&t.ext))
}

/// `ξ⁰`-chart: `(log e_T, e_b, log e_K)`.
pub fn chart(e: &SystemState) -> Result<Vector24> {
    Ok(TangentTriple {
        nav: e.nav.log()?,
        bias: e.bias,
        ext: e.ext.log()?,
    }
    .to_vector())
}

/// Error coordinates `ε = chart(φ(X̂⁻¹, ξ))`.
pub fn error_coordinates(x_hat: &GroupElement, xi: &SystemState) -> Result<Vector24> {
    chart(&action_phi(&x_hat.inverse(), xi))
}

/// The group element `Δ` with `φ(Δ, ξ⁰) = chart⁻¹(ε)`.
///
/// Left-multiplying the estimate by `Δ` moves `φ(X̂, ξ⁰)` to
/// `φ(X̂, chart⁻¹(ε))`.
pub fn correction(eps: &Vector24) -> GroupElement {
    transport(&SystemState::origin(), &chart_inverse(eps))
}

/// Skew blocks `(W, Y, Z)` of the state matrix.
pub fn wyz(xi_hat: &SystemState, u: &SystemInput) -> (Matrix3<f64>, Matrix3<f64>, Matrix3<f64>) {
    let c = xi_hat.nav.rot.matrix();
    let b = &xi_hat.bias;
    let omega: Vector3<f64> = u.imu.fixed_rows::<3>(0) - b.fixed_rows::<3>(0);
    let acc: Vector3<f64> = u.imu.fixed_rows::<3>(3) - b.fixed_rows::<3>(3);
    let mu: Vector3<f64> = u.imu.fixed_rows::<3>(6) - b.fixed_rows::<3>(6);
    let w = c * omega;
    let (v, r) = (&xi_hat.nav.vel, &xi_hat.nav.pos);
    let y = c * acc + v.cross(&w) + u.gravity;
    let z = c * mu + r.cross(&w) + v;
    (hat3(&w), hat3(&y), hat3(&z))
}

/// Closed-form state matrix `F` of the linearized error dynamics.
///
/// ```text
///     ┌ F_T  -I₉  0 ┐         ┌ 0    0  0 ┐        ┌ W       ┐        ┌ W      ┐
/// F = │ 0    F_b  0 │   F_T = │ g^∧  0  0 │  F_b = │ Y  W    │  F_K = │ 0  W   │
///     └ 0    0  F_K ┘         └ 0    I  0 ┘        └ Z     W ┘        └        ┘
/// ```
pub fn build_f(xi_hat: &SystemState, u: &SystemInput, opts: &LinearizationOptions) -> Matrix24 {
    let (w, y, z) = wyz(xi_hat, u);
    let mut f = Matrix24::zeros();
    let g = if opts.flip_gravity_block { -u.gravity } else { u.gravity };
    f.fixed_view_mut::<3, 3>(3, 0).copy_from(&hat3(&g));
    f.fixed_view_mut::<3, 3>(6, 3).copy_from(&Matrix3::identity());
    f.fixed_view_mut::<9, 9>(0, 9)
        .copy_from(&-SMatrix::<f64, 9, 9>::identity());
    for k in 0..3 {
        f.fixed_view_mut::<3, 3>(9 + 3 * k, 9 + 3 * k).copy_from(&w);
    }
    f.fixed_view_mut::<3, 3>(12, 9).copy_from(&y);
    f.fixed_view_mut::<3, 3>(15, 9).copy_from(&z);
    f.fixed_view_mut::<3, 3>(18, 18).copy_from(&w);
    f.fixed_view_mut::<3, 3>(21, 21).copy_from(&w);
    if opts.extrinsic_coupling == ExtrinsicCoupling::PrintedZ {
        f.fixed_view_mut::<3, 3>(21, 18).copy_from(&z);
    }
    f
}

/// Process-noise input matrix at the current estimate.
///
/// Channels: gyro (3), accel (3), gyro-bias walk (3), accel-bias walk (3),
/// velocity-bias walk (3), extrinsic drift (6). IMU white noise enters the
/// navigation block and the bias walks enter the bias block, both through
/// `Ad_{T̂}`; extrinsic drift enters through `Ad_{B̂}`.
pub fn noise_input(x_hat: &GroupElement) -> NoiseInput {
    let ad_t = x_hat.nav.adjoint();
    let mut g = NoiseInput::zeros();
    g.fixed_view_mut::<9, 6>(0, 0)
        .copy_from(&-ad_t.fixed_view::<9, 6>(0, 0));
    g.fixed_view_mut::<9, 9>(9, 6).copy_from(&ad_t);
    g.fixed_view_mut::<6, 6>(18, 15).copy_from(&x_hat.ext.adjoint());
    g
}

/// Discrete transition `I + F dt + ½ F² dt²`, or `exp(F dt)` when `exact`.
pub fn transition(f: &Matrix24, dt: f64, exact: bool) -> Matrix24 {
    let fd = f * dt;
    if exact {
        fd.exp()
    } else {
        Matrix24::identity() + fd + fd * fd * 0.5
    }
}
