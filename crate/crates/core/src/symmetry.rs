//! The symmetry group `G = (SE₂(3) ⋉ se₂(3)) × SE(3)`, its actions on the
//! state manifold and the input space, and the equivariant lift.
//!
//! Tangent vectors of the state manifold are represented left-trivialized:
//! a velocity `(Ṫ, ḃ, K̇)` at `ξ = (T, b, K)` is stored as
//! `((T⁻¹Ṫ)^∨, ḃ, (K⁻¹K̇)^∨)`.

use nalgebra::{SVector, Vector3};

use crate::error::Result;
use crate::lie::{phi1, ExtendedPose, MatrixLieGroup, Pose, Rot3, Vector6, Vector9};

pub type Vector24 = SVector<f64, 24>;

/// Step used by the central finite differences of the verification paths.
pub const FD_STEP: f64 = 1e-6;

/// A 24-dimensional quantity split into navigation (9), bias (9) and
/// extrinsic (6) blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentTriple {
    pub nav: Vector9,
    pub bias: Vector9,
    pub ext: Vector6,
}

impl TangentTriple {
    pub fn zeros() -> Self {
        Self {
            nav: Vector9::zeros(),
            bias: Vector9::zeros(),
            ext: Vector6::zeros(),
        }
    }

    pub fn to_vector(&self) -> Vector24 {
        let mut v = Vector24::zeros();
        v.fixed_rows_mut::<9>(0).copy_from(&self.nav);
        v.fixed_rows_mut::<9>(9).copy_from(&self.bias);
        v.fixed_rows_mut::<6>(18).copy_from(&self.ext);
        v
    }

    pub fn from_vector(v: &Vector24) -> Self {
        Self {
            nav: v.fixed_rows::<9>(0).into(),
            bias: v.fixed_rows::<9>(9).into(),
            ext: v.fixed_rows::<6>(18).into(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            nav: self.nav * s,
            bias: self.bias * s,
            ext: self.ext * s,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            nav: self.nav + o.nav,
            bias: self.bias + o.bias,
            ext: self.ext + o.ext,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    /// Largest block 2-norm.
    pub fn max_block_norm(&self) -> f64 {
        self.nav.norm().max(self.bias.norm()).max(self.ext.norm())
    }
}

/// Physical state `ξ = (T, b, K)`.
///
/// `bias` holds `(b_g, b_a, b_μ)` with `b_μ` the virtual velocity bias.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemState {
    pub nav: ExtendedPose,
    pub bias: Vector9,
    pub ext: Pose,
}

impl SystemState {
    pub fn new(nav: ExtendedPose, bias: Vector9, ext: Pose) -> Self {
        Self { nav, bias, ext }
    }

    /// The fixed origin `ξ⁰ = (I, 0, I)`.
    pub fn origin() -> Self {
        Self::new(ExtendedPose::identity(), Vector9::zeros(), Pose::identity())
    }

    pub fn gyro_bias(&self) -> Vector3<f64> {
        self.bias.fixed_rows::<3>(0).into()
    }

    pub fn accel_bias(&self) -> Vector3<f64> {
        self.bias.fixed_rows::<3>(3).into()
    }

    /// `(T exp(δ_T), b + δ_b, K exp(δ_K))`.
    pub fn retract(&self, d: &TangentTriple) -> Self {
        Self::new(
            self.nav.compose(&ExtendedPose::exp(&d.nav)),
            self.bias + d.bias,
            self.ext.compose(&Pose::exp(&d.ext)),
        )
    }

    /// Inverse of [`SystemState::retract`]: left-trivialized difference.
    pub fn local(&self, other: &Self) -> Result<TangentTriple> {
        Ok(TangentTriple {
            nav: self.nav.inverse().compose(&other.nav).log()?,
            bias: other.bias - self.bias,
            ext: self.ext.inverse().compose(&other.ext).log()?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.nav.rot.matrix().iter().all(|x| x.is_finite())
            && self.nav.vel.iter().all(|x| x.is_finite())
            && self.nav.pos.iter().all(|x| x.is_finite())
            && self.bias.iter().all(|x| x.is_finite())
            && self.ext.rot.matrix().iter().all(|x| x.is_finite())
            && self.ext.trans.iter().all(|x| x.is_finite())
    }
}

/// System input `u = (w^∧, g^∧, τ^∧, τ_k^∧)`.
///
/// `imu` is `(ω, a, μ)`; gravity is stored as the world vector and housed in
/// `g^∧ = (0, g, 0)` by [`SystemInput::gravity_tuple`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemInput {
    pub imu: Vector9,
    pub gravity: Vector3<f64>,
    pub bias_drift: Vector9,
    pub ext_drift: Vector6,
}

impl SystemInput {
    /// IMU sample with zero virtual velocity and no drift.
    pub fn from_imu(gyro: Vector3<f64>, accel: Vector3<f64>, gravity: Vector3<f64>) -> Self {
        let mut imu = Vector9::zeros();
        imu.fixed_rows_mut::<3>(0).copy_from(&gyro);
        imu.fixed_rows_mut::<3>(3).copy_from(&accel);
        Self {
            imu,
            gravity,
            bias_drift: Vector9::zeros(),
            ext_drift: Vector6::zeros(),
        }
    }

    pub fn gravity_tuple(&self) -> Vector9 {
        let mut g = Vector9::zeros();
        g.fixed_rows_mut::<3>(3).copy_from(&self.gravity);
        g
    }
}

/// Element `X = (A, a^∧, B)` of the symmetry group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub nav: ExtendedPose,
    pub bias: Vector9,
    pub ext: Pose,
}

impl GroupElement {
    pub fn new(nav: ExtendedPose, bias: Vector9, ext: Pose) -> Self {
        Self { nav, bias, ext }
    }

    pub fn identity() -> Self {
        Self::new(ExtendedPose::identity(), Vector9::zeros(), Pose::identity())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// `(A_X A_Y, a_X + Ad_{A_X} a_Y, B_X B_Y)`.
    pub fn compose(&self, y: &Self) -> Self {
        Self::new(
            self.nav.compose(&y.nav),
            self.bias + self.nav.adjoint() * y.bias,
            self.ext.compose(&y.ext),
        )
    }

    pub fn inverse(&self) -> Self {
        let ai = self.nav.inverse();
        Self::new(ai, -(ai.adjoint() * self.bias), self.ext.inverse())
    }

    /// Group exponential.
    ///
    /// The semi-direct factor follows `ȧ = Ad_{A(t)} Λ₂`, which integrates to
    /// `a = Φ(ad_{Λ₁}) Λ₂` with `Φ(M) = Σ M^k/(k+1)!`.
    pub fn exp(v: &TangentTriple) -> Self {
        let semi = phi1(&ExtendedPose::ad(&v.nav)) * v.bias;
        Self::new(ExtendedPose::exp(&v.nav), semi, Pose::exp(&v.ext))
    }

    pub fn renormalized(&self) -> Self {
        Self::new(self.nav.renormalized(), self.bias, self.ext.renormalized())
    }
}

/// `(0, 0, v)` in `se₂(3)` coordinates: the drift field `f₁⁰` at `(C, v, r)`
/// read as an algebra element.
pub fn f1_zero(x: &ExtendedPose) -> Vector9 {
    let mut out = Vector9::zeros();
    out.fixed_rows_mut::<3>(6).copy_from(&x.vel);
    out
}

/// Lifts an `so(3)` block to the `se(3)` element `(ω^∧, 0)`.
fn rotation_block(v: &Vector9) -> Vector6 {
    let mut out = Vector6::zeros();
    out.fixed_rows_mut::<3>(0).copy_from(&v.fixed_rows::<3>(0));
    out
}

fn rot_as_pose(r: &Rot3) -> Pose {
    Pose::from_rotation(*r)
}

/// State action `φ(X, ξ) = (T A, Ad_{A⁻¹}(b − a), Γ(A)⁻¹ K B)`.
pub fn action_phi(x: &GroupElement, xi: &SystemState) -> SystemState {
    let ai = x.nav.inverse();
    SystemState::new(
        xi.nav.compose(&x.nav),
        ai.adjoint() * (xi.bias - x.bias),
        rot_as_pose(&x.nav.rot.transpose())
            .compose(&xi.ext)
            .compose(&x.ext),
    )
}

/// Input action
/// `ψ(X, γ) = (Ad_{A⁻¹}(γ₁ − a) + f₁⁰(A⁻¹), γ₂, Ad_{A⁻¹} γ₃, Ad_{B⁻¹} γ₄)`.
pub fn action_psi(x: &GroupElement, u: &SystemInput) -> SystemInput {
    let ai = x.nav.inverse();
    let ad_ai = ai.adjoint();
    let imu_tuple = ad_ai * (u.imu - x.bias) + f1_zero(&ai);
    SystemInput {
        imu: imu_tuple,
        gravity: u.gravity,
        bias_drift: ad_ai * u.bias_drift,
        ext_drift: x.ext.inverse().adjoint() * u.ext_drift,
    }
}

/// The unique `X` with `φ(X, from) = to`.
pub fn transport(from: &SystemState, to: &SystemState) -> GroupElement {
    let a = from.nav.inverse().compose(&to.nav);
    let semi = from.bias - a.adjoint() * to.bias;
    let b = from
        .ext
        .inverse()
        .compose(&rot_as_pose(&a.rot))
        .compose(&to.ext);
    GroupElement::new(a, semi, b)
}

/// Drift field `f⁰(ξ)`, left-trivialized.
pub fn drift_field(xi: &SystemState) -> TangentTriple {
    TangentTriple {
        nav: f1_zero(&xi.nav.inverse()) * -1.0,
        bias: Vector9::zeros(),
        ext: Vector6::zeros(),
    }
}

/// Input field `f_γ(ξ) = (T(γ₁ − b)^∧ + γ₂^∧ T, γ₃, K γ₄^∧)`, left-trivialized.
pub fn input_field(xi: &SystemState, u: &SystemInput) -> TangentTriple {
    TangentTriple {
        nav: u.imu - xi.bias + xi.nav.inverse().adjoint() * u.gravity_tuple(),
        bias: u.bias_drift,
        ext: u.ext_drift,
    }
}

/// Full dynamics `f⁰(ξ) + f_γ(ξ)`, left-trivialized.
pub fn system_field(xi: &SystemState, u: &SystemInput) -> TangentTriple {
    drift_field(xi).add(&input_field(xi, u))
}

/// Equivariant lift `Λ(ξ, γ) = (Λ₁, Λ₂, Λ₃)`.
///
/// * `Λ₁ = γ₁ − b + Ad_{T⁻¹} γ₂ + T⁻¹ f₁⁰(T)`
/// * `Λ₂ = ad_b Λ₁ − γ₃`
/// * `Λ₃ = Ad_{K⁻¹}(Γ(Λ₁), 0) + γ₄`
pub fn lift(xi: &SystemState, u: &SystemInput) -> TangentTriple {
    let ti = xi.nav.inverse();
    // T⁻¹ f₁⁰(T) = (0, 0, Cᵀ v), which is -f₁⁰(T⁻¹).
    let l1 = u.imu - xi.bias + ti.adjoint() * u.gravity_tuple() - f1_zero(&ti);
    let l2 = ExtendedPose::ad(&xi.bias) * l1 - u.bias_drift;
    let l3 = xi.ext.inverse().adjoint() * rotation_block(&l1) + u.ext_drift;
    TangentTriple {
        nav: l1,
        bias: l2,
        ext: l3,
    }
}

/// Central-difference derivative of `s ↦ curve(s)` at 0, left-trivialized at `at`.
pub fn curve_derivative<F>(at: &SystemState, h: f64, curve: F) -> Result<TangentTriple>
where
    F: Fn(f64) -> SystemState,
{
    let plus = at.local(&curve(h))?;
    let minus = at.local(&curve(-h))?;
    Ok(plus.sub(&minus).scale(0.5 / h))
}

/// Residual of the lift condition `dφ^(ξ) Λ(ξ, γ) = f⁰(ξ) + f_γ(ξ)`.
pub fn lift_residual(xi: &SystemState, u: &SystemInput, h: f64) -> Result<f64> {
    let lam = lift(xi, u);
    let pushed = curve_derivative(xi, h, |s| action_phi(&GroupElement::exp(&lam.scale(s)), xi))?;
    Ok(pushed.sub(&system_field(xi, u)).max_block_norm())
}

/// Residual of the equivariance identity
/// `f⁰(ξ) + f_{ψ_X(γ)}(ξ) = dφ_X(f⁰(φ_{X⁻¹}(ξ)) + f_γ(φ_{X⁻¹}(ξ)))`.
///
/// `dφ_X` is evaluated by central differences with step `h` along the curve
/// `s ↦ φ_X(retract(ξ', sV))`. For `X = I` the differential is the identity
/// and is applied directly.
pub fn equivariance_residual(
    x: &GroupElement,
    xi: &SystemState,
    u: &SystemInput,
    h: f64,
) -> Result<f64> {
    let lhs = system_field(xi, &action_psi(x, u));
    let rhs = if x.is_identity() {
        system_field(xi, u)
    } else {
        let source = action_phi(&x.inverse(), xi);
        let v = system_field(&source, u);
        curve_derivative(xi, h, |s| action_phi(x, &source.retract(&v.scale(s))))?
    };
    Ok(lhs.sub(&rhs).max_block_norm())
}

/// [`equivariance_residual`] at the default step [`FD_STEP`].
pub fn check_equivariance(x: &GroupElement, xi: &SystemState, u: &SystemInput) -> Result<f64> {
    equivariance_residual(x, xi, u, FD_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &SystemState, b: &SystemState) -> f64 {
        a.local(b).unwrap().max_block_norm()
    }

    fn group_close(a: &GroupElement, b: &GroupElement) -> f64 {
        let dn = (a.nav.to_matrix() - b.nav.to_matrix()).norm();
        let db = (a.bias - b.bias).norm();
        let de = (a.ext.to_matrix() - b.ext.to_matrix()).norm();
        dn.max(db).max(de)
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_group(&mut rng);
        assert!(group_close(&x.compose(&GroupElement::identity()), &x) < 1e-15);
        assert!(group_close(&GroupElement::identity().compose(&x), &x) < 1e-15);
        assert_eq!(GroupElement::identity().inverse(), GroupElement::identity());
    }

    #[test]
    fn associativity_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (x, y, z) = (random_group(&mut rng), random_group(&mut rng), random_group(&mut rng));
            assert!(group_close(&x.compose(&y).compose(&z), &x.compose(&y.compose(&z))) < 1e-11);
            assert!(group_close(&x.compose(&x.inverse()), &GroupElement::identity()) < 1e-11);
            assert!(group_close(&x.inverse().compose(&x), &GroupElement::identity()) < 1e-11);
            assert!(group_close(&x.inverse().inverse(), &x) < 1e-12);
        }
    }

    #[test]
    fn phi_identity_and_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi = random_state(&mut rng);
        assert_eq!(action_phi(&GroupElement::identity(), &xi), xi);

        let x = random_group(&mut rng);
        let got = action_phi(&x, &SystemState::origin());
        let ai = x.nav.inverse();
        let want = SystemState::new(
            x.nav,
            -(ai.adjoint() * x.bias),
            Pose::from_rotation(x.nav.rot.transpose()).compose(&x.ext),
        );
        assert!(close(&got, &want) < 1e-14);
    }

    #[test]
    fn phi_and_psi_are_right_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let (x, y) = (random_group(&mut rng), random_group(&mut rng));
            let xi = random_state(&mut rng);
            let u = random_input(&mut rng);
            let a = action_phi(&x.compose(&y), &xi);
            let b = action_phi(&y, &action_phi(&x, &xi));
            assert!(close(&a, &b) < 1e-10);
            let p = action_psi(&x.compose(&y), &u);
            let q = action_psi(&y, &action_psi(&x, &u));
            assert_relative_eq!(p.imu, q.imu, epsilon = 1e-10);
            assert_relative_eq!(p.bias_drift, q.bias_drift, epsilon = 1e-10);
            assert_relative_eq!(p.ext_drift, q.ext_drift, epsilon = 1e-10);
        }
    }

    #[test]
    fn psi_identity_and_pure_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_input(&mut rng);
        assert_eq!(action_psi(&GroupElement::identity(), &u), u);

        let mut x = random_group(&mut rng);
        x.bias = Vector9::zeros();
        x.nav.vel = Vector3::zeros();
        let got = action_psi(&x, &u);
        assert_relative_eq!(got.imu, x.nav.inverse().adjoint() * u.imu, epsilon = 1e-14);
    }

    #[test]
    fn transport_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let (a, b) = (random_state(&mut rng), random_state(&mut rng));
            let x = transport(&a, &b);
            assert!(close(&action_phi(&x, &a), &b) < 1e-10);
            let y = random_group(&mut rng);
            assert!(group_close(&transport(&a, &action_phi(&y, &a)), &y) < 1e-10);
        }
    }

    #[test]
    fn lift_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut u = random_input(&mut rng);
        u.gravity = Vector3::zeros();
        u.bias_drift = Vector9::zeros();
        u.ext_drift = Vector6::zeros();
        let lam = lift(&SystemState::origin(), &u);
        assert_eq!(lam.nav, u.imu);
        assert_eq!(lam.bias, Vector9::zeros());
        assert_eq!(lam.ext, rotation_block(&u.imu));

        let mut xi = SystemState::origin();
        xi.bias = random_vec9(&mut rng, 1.0);
        let zero = SystemInput::from_imu(Vector3::zeros(), Vector3::zeros(), Vector3::zeros());
        let lam = lift(&xi, &zero);
        assert_eq!(lam.nav, -xi.bias);
        assert!(lam.bias.norm() < 1e-15);
    }

    #[test]
    fn lift_condition_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let xi = random_state(&mut rng);
            let u = random_input(&mut rng);
            assert!(lift_residual(&xi, &u, FD_STEP).unwrap() < 1e-5);
        }
    }

    #[test]
    fn equivariance_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xi = random_state(&mut rng);
        let u = random_input(&mut rng);
        assert_eq!(check_equivariance(&GroupElement::identity(), &xi, &u).unwrap(), 0.0);
        for _ in 0..100 {
            let x = random_group(&mut rng);
            let xi = random_state(&mut rng);
            let u = random_input(&mut rng);
            assert!(check_equivariance(&x, &xi, &u).unwrap() < 1e-5);
            let zero = SystemInput::from_imu(Vector3::zeros(), Vector3::zeros(), Vector3::zeros());
            assert!(check_equivariance(&x, &xi, &zero).unwrap() < 1e-5);
        }
    }

    #[test]
    fn group_exp_is_one_parameter_subgroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let v = random_triple(&mut rng, 0.8);
        let a = GroupElement::exp(&v.scale(0.3)).compose(&GroupElement::exp(&v.scale(0.7)));
        assert!(group_close(&a, &GroupElement::exp(&v)) < 1e-12);
    }
}
