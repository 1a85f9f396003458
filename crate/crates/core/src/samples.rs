//! Random draws of group elements, states and inputs for property checks.

use nalgebra::{SVector, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::lie::{ExtendedPose, MatrixLieGroup, Pose, Rot3, Vector6, Vector9};
use crate::symmetry::{GroupElement, SystemInput, SystemState, TangentTriple};

pub fn gaussian<const N: usize, R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> SVector<f64, N> {
    SVector::<f64, N>::from_fn(|_, _| {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    })
}

/// Uniform in the cube `[-scale, scale]^N`.
pub fn uniform_vec<const N: usize, R: Rng + ?Sized>(rng: &mut R, scale: f64) -> SVector<f64, N> {
    SVector::<f64, N>::from_fn(|_, _| rng.random_range(-scale..=scale))
}

pub fn random_vec3<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Vector3<f64> {
    uniform_vec::<3, R>(rng, scale)
}

pub fn random_vec9<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Vector9 {
    uniform_vec::<9, R>(rng, scale)
}

/// Vector with direction uniform on the sphere and norm uniform in `[0, max_norm]`.
pub fn random_in_ball<const N: usize, R: Rng + ?Sized>(rng: &mut R, max_norm: f64) -> SVector<f64, N> {
    let d = gaussian::<N, R>(rng, 1.0);
    let n = d.norm().max(1e-300);
    d / n * rng.random_range(0.0..=max_norm)
}

pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rot3 {
    Rot3::exp(&random_in_ball::<3, R>(rng, 3.0))
}

pub fn random_extended_pose<R: Rng + ?Sized>(rng: &mut R) -> ExtendedPose {
    ExtendedPose::new(random_rotation(rng), random_vec3(rng, 2.0), random_vec3(rng, 5.0))
}

pub fn random_pose<R: Rng + ?Sized>(rng: &mut R) -> Pose {
    Pose::new(random_rotation(rng), random_vec3(rng, 1.0))
}

pub fn random_group<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
    GroupElement::new(random_extended_pose(rng), random_vec9(rng, 1.0), random_pose(rng))
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> SystemState {
    SystemState::new(random_extended_pose(rng), random_vec9(rng, 0.5), random_pose(rng))
}

pub fn random_input<R: Rng + ?Sized>(rng: &mut R) -> SystemInput {
    SystemInput {
        imu: random_vec9(rng, 2.0),
        gravity: random_vec3(rng, 10.0),
        bias_drift: random_vec9(rng, 0.1),
        ext_drift: uniform_vec::<6, R>(rng, 0.1),
    }
}

pub fn random_triple<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> TangentTriple {
    TangentTriple {
        nav: random_vec9(rng, scale),
        bias: random_vec9(rng, scale),
        ext: uniform_vec::<6, R>(rng, scale) as Vector6,
    }
}
