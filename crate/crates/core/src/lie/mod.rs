//! Matrix Lie groups used by the filter: SO(3), SE(3) and SE₂(3).
//!
//! Tangent coordinates always place the rotational part first:
//!
//! * `so(3)`   → `ω`
//! * `se(3)`   → `(ω, ρ)` with `ρ` the translational slot
//! * `se₂(3)`  → `(ω, ν, ρ)` with `ν` the velocity slot and `ρ` the position slot
//!
//! Group elements are stored in factored form (rotation plus translation
//! vectors); the homogeneous matrix embeddings are available through
//! [`MatrixLieGroup::to_matrix`] and [`MatrixLieGroup::hat`].

mod se23;
mod se3;
mod so3;

pub use se23::ExtendedPose;
pub use se3::Pose;
pub use so3::{hat3, left_jacobian, left_jacobian_inv, vee3, Rot3};

use nalgebra::{SMatrix, SVector};

use crate::error::Result;

pub type Vector6 = SVector<f64, 6>;
pub type Vector9 = SVector<f64, 9>;
pub type Matrix6 = SMatrix<f64, 6, 6>;
pub type Matrix9 = SMatrix<f64, 9, 9>;
pub type Matrix4 = SMatrix<f64, 4, 4>;
pub type Matrix5 = SMatrix<f64, 5, 5>;

/// Angle below which exp/log and the Jacobians switch to Taylor expansions.
pub const SMALL_ANGLE: f64 = 1e-6;

/// Frobenius distance of `RᵀR` from identity beyond which rotations are
/// re-orthonormalized.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Common interface of the concrete matrix Lie groups.
///
/// `Tangent` is the coordinate vector of the Lie algebra, `AdMatrix` the
/// matrix of `Ad^∨` / `ad` in those coordinates and `Embedding` the square
/// matrix representation of both group and algebra elements.
pub trait MatrixLieGroup: Sized + Clone + std::fmt::Debug {
    type Tangent: Copy + std::fmt::Debug;
    type AdMatrix: Copy + std::fmt::Debug;
    type Embedding: Copy + std::fmt::Debug;

    const DOF: usize;

    fn identity() -> Self;
    fn compose(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn exp(v: &Self::Tangent) -> Self;
    fn log(&self) -> Result<Self::Tangent>;

    /// `Ad_X^∨`, i.e. the matrix of `u ↦ (X u^∧ X⁻¹)^∨`.
    fn adjoint(&self) -> Self::AdMatrix;

    /// `ad_u`, i.e. the matrix of `v ↦ [u^∧, v^∧]^∨`.
    fn ad(u: &Self::Tangent) -> Self::AdMatrix;

    fn hat(v: &Self::Tangent) -> Self::Embedding;
    fn vee(m: &Self::Embedding) -> Self::Tangent;
    fn to_matrix(&self) -> Self::Embedding;

    /// Differential of left translation at the identity: `u ↦ X u^∧`.
    fn dl(&self, u: &Self::Tangent) -> Self::Embedding;

    /// Differential of right translation at the identity: `u ↦ u^∧ X`.
    fn dr(&self, u: &Self::Tangent) -> Self::Embedding;
}

/// `Σ_k M^k / (k+1)!`, the integral `∫₀¹ exp(sM) ds`.
///
/// Applied to `ad_u` this is the left Jacobian of the group; the semi-direct
/// factor of the symmetry group integrates through it.
pub fn phi1<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let mut sum = SMatrix::<f64, N, N>::identity();
    let mut term = SMatrix::<f64, N, N>::identity();
    for k in 1..80 {
        term = term * m / (k as f64 + 1.0);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi1_of_zero_is_identity() {
        let z = Matrix9::zeros();
        assert_eq!(phi1(&z), Matrix9::identity());
    }

    #[test]
    fn phi1_nilpotent_closed_form() {
        let mut m = SMatrix::<f64, 2, 2>::zeros();
        m[(0, 1)] = 3.0;
        let p = phi1(&m);
        assert_eq!(p[(0, 1)], 1.5);
        assert_eq!(p[(0, 0)], 1.0);
    }
}
