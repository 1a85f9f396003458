//! Property checks over random cases with fixed seeds.

use std::time::Instant;

use nalgebra::{Matrix2, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eqf::gravity::{build_bg, s2_boxminus, s2_boxplus, GravityDir};
use crate::eqf::linearization::{build_f, LinearizationOptions};
use crate::eqf::oracle::{compare_blocks, f_jacobian, h_row, COORD_STEP, TIME_STEP};
use crate::error::Result;
use crate::lie::{ExtendedPose, MatrixLieGroup, Pose, Rot3, Vector6, Vector9};
use crate::measurement::{build_row, world_point, ExtrinsicRowForm, PlaneFit, PlaneObservation};
use crate::samples::*;
use crate::symmetry::{
    action_phi, action_psi, equivariance_residual, lift_residual, transport, GroupElement, SystemInput, SystemState,
    FD_STEP,
};

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Only run checks whose name contains this string.
    pub filter: Option<String>,
    /// Cases per randomized check (defaults per check when `None`).
    pub cases: Option<usize>,
    /// Mutation hook: negate the `g^∧` block of the closed-form `F`.
    pub flip_gravity_block: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    /// Failing sub-items (e.g. mismatched Jacobian blocks).
    pub details: Vec<String>,
}

type CheckFn = fn(usize, &VerifyOptions) -> Result<(f64, Vec<String>)>;

struct Check {
    name: &'static str,
    cases: usize,
    tolerance: f64,
    run: CheckFn,
}

const CHECKS: [Check; 10] = [
    Check { name: "group_axioms", cases: 1000, tolerance: 1e-10, run: group_axioms },
    Check { name: "phi_action", cases: 1000, tolerance: 1e-10, run: phi_action },
    Check { name: "psi_action", cases: 1000, tolerance: 1e-10, run: psi_action },
    Check { name: "transitivity", cases: 1000, tolerance: 1e-10, run: transitivity },
    Check { name: "equivariance", cases: 1000, tolerance: 1e-5, run: equivariance },
    Check { name: "lift_condition", cases: 1000, tolerance: 1e-5, run: lift_condition },
    Check { name: "f_oracle", cases: 100, tolerance: 1e-4, run: f_oracle },
    Check { name: "h_oracle", cases: 100, tolerance: 1e-5, run: h_oracle },
    Check { name: "s2_basis", cases: 1000, tolerance: 1e-12, run: s2_basis },
    Check { name: "s2_roundtrip", cases: 1000, tolerance: 1e-9, run: s2_roundtrip },
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Runs every selected check; a check whose evaluation errors counts as failed.
pub fn run_checks(opts: &VerifyOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .filter(|c| opts.filter.as_ref().is_none_or(|f| c.name.contains(f.as_str())))
        .map(|c| {
            let cases = opts.cases.unwrap_or(c.cases);
            let start = Instant::now();
            let (residual, details) = match (c.run)(cases, opts) {
                Ok(r) => r,
                Err(e) => (f64::INFINITY, vec![e.to_string()]),
            };
            CheckResult {
                name: c.name.to_string(),
                cases,
                residual,
                tolerance: c.tolerance,
                passed: residual.is_finite() && residual < c.tolerance && details.is_empty(),
                seconds: start.elapsed().as_secs_f64(),
                details,
            }
        })
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn group_distance(a: &GroupElement, b: &GroupElement) -> f64 {
    (a.nav.to_matrix() - b.nav.to_matrix())
        .amax()
        .max((a.bias - b.bias).amax())
        .max((a.ext.to_matrix() - b.ext.to_matrix()).amax())
}

pub fn state_distance(a: &SystemState, b: &SystemState) -> f64 {
    (a.nav.to_matrix() - b.nav.to_matrix())
        .amax()
        .max((a.bias - b.bias).amax())
        .max((a.ext.to_matrix() - b.ext.to_matrix()).amax())
}

pub fn input_distance(a: &SystemInput, b: &SystemInput) -> f64 {
    (a.imu - b.imu)
        .amax()
        .max((a.gravity - b.gravity).amax())
        .max((a.bias_drift - b.bias_drift).amax())
        .max((a.ext_drift - b.ext_drift).amax())
}

fn axioms<G, const N: usize>(a: &G, b: &G, c: &G) -> f64
where
    G: MatrixLieGroup<Embedding = nalgebra::SMatrix<f64, N, N>>,
{
    let d = |x: &G, y: &G| (x.to_matrix() - y.to_matrix()).amax();
    let id = G::identity();
    d(&a.compose(b).compose(c), &a.compose(&b.compose(c)))
        .max(d(&a.compose(&id), a))
        .max(d(&id.compose(a), a))
        .max(d(&a.compose(&a.inverse()), &id))
        .max(d(&a.inverse().compose(a), &id))
}

fn group_axioms(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (a, b, c) = (random_rotation(&mut r), random_rotation(&mut r), random_rotation(&mut r));
        worst = worst.max(axioms::<Rot3, 3>(&a, &b, &c));
        let (a, b, c) = (random_pose(&mut r), random_pose(&mut r), random_pose(&mut r));
        worst = worst.max(axioms::<Pose, 4>(&a, &b, &c));
        let (a, b, c) = (random_extended_pose(&mut r), random_extended_pose(&mut r), random_extended_pose(&mut r));
        worst = worst.max(axioms::<ExtendedPose, 5>(&a, &b, &c));
        let (a, b, c) = (random_group(&mut r), random_group(&mut r), random_group(&mut r));
        let id = GroupElement::identity();
        worst = worst
            .max(group_distance(&a.compose(&b).compose(&c), &a.compose(&b.compose(&c))))
            .max(group_distance(&a.compose(&id), &a))
            .max(group_distance(&id.compose(&a), &a))
            .max(group_distance(&a.compose(&a.inverse()), &id))
            .max(group_distance(&a.inverse().compose(&a), &id));
    }
    Ok((worst, vec![]))
}

fn phi_action(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (x, y, xi) = (random_group(&mut r), random_group(&mut r), random_state(&mut r));
        let lhs = action_phi(&y, &action_phi(&x, &xi));
        let rhs = action_phi(&x.compose(&y), &xi);
        worst = worst
            .max(state_distance(&lhs, &rhs))
            .max(state_distance(&action_phi(&GroupElement::identity(), &xi), &xi));
    }
    Ok((worst, vec![]))
}

fn psi_action(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (x, y, u) = (random_group(&mut r), random_group(&mut r), random_input(&mut r));
        let lhs = action_psi(&y, &action_psi(&x, &u));
        let rhs = action_psi(&x.compose(&y), &u);
        worst = worst
            .max(input_distance(&lhs, &rhs))
            .max(input_distance(&action_psi(&GroupElement::identity(), &u), &u));
    }
    Ok((worst, vec![]))
}

fn transitivity(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (a, b) = (random_state(&mut r), random_state(&mut r));
        let x = transport(&a, &b);
        worst = worst.max(state_distance(&action_phi(&x, &a), &b));
        // Freeness: the only element moving a to φ(y, a) is y.
        let y = random_group(&mut r);
        worst = worst.max(group_distance(&transport(&a, &action_phi(&y, &a)), &y));
    }
    Ok((worst, vec![]))
}

fn equivariance(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (x, xi, u) = (random_group(&mut r), random_state(&mut r), random_input(&mut r));
        worst = worst.max(equivariance_residual(&x, &xi, &u, FD_STEP)?);
    }
    Ok((worst, vec![]))
}

fn lift_condition(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (xi, u) = (random_state(&mut r), random_input(&mut r));
        worst = worst.max(lift_residual(&xi, &u, FD_STEP)?);
    }
    Ok((worst, vec![]))
}

fn f_oracle(cases: usize, opts: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut r = rng(7);
    let lin = LinearizationOptions {
        flip_gravity_block: opts.flip_gravity_block,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for case in 0..cases {
        let x = random_group(&mut r);
        let mut u = random_input(&mut r);
        u.bias_drift = Vector9::zeros();
        u.ext_drift = Vector6::zeros();
        let xi_hat = action_phi(&x, &SystemState::origin());
        let fd = f_jacobian(&x, &u, COORD_STEP, TIME_STEP)?;
        for d in compare_blocks(&build_f(&xi_hat, &u, &lin), &fd) {
            worst = worst.max(d.rel_error);
            if d.rel_error >= 1e-4 && details.len() < 10 {
                details.push(format!("case {case}: {} relative error {:.3e}", d.label(), d.rel_error));
            }
        }
    }
    Ok((worst, details))
}

fn h_oracle(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let x = random_group(&mut r);
        let xi = action_phi(&x, &SystemState::origin());
        let point = random_vec3(&mut r, 10.0);
        let normal = random_vec3(&mut r, 1.0).normalize();
        let obs = PlaneObservation {
            point,
            plane: PlaneFit {
                normal,
                point: world_point(&xi, &point) + random_vec3(&mut r, 0.3),
                rms: 0.0,
                valid: true,
            },
            variance: 1e-4,
        };
        let (_, row) = build_row(&xi, &obs, f64::INFINITY, ExtrinsicRowForm::Derived)?;
        worst = worst.max((row - h_row(&x, &obs, 1e-6)).amax());
    }
    Ok((worst, vec![]))
}

fn s2_samples(seed: u64, cases: usize) -> impl Iterator<Item = (GravityDir, ChaCha8Rng)> {
    let mut r = rng(seed);
    std::iter::from_fn(move || loop {
        let g = GravityDir::unit(gaussian::<3, _>(&mut r, 1.0));
        if g.dir().z > -0.99 {
            return Some((g, rng(r.random())));
        }
    })
    .take(cases)
}

fn s2_basis(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut worst = 0.0f64;
    for (g, _) in s2_samples(9, cases) {
        let b = build_bg(&g)?;
        let n: Vector3<f64> = *g.dir();
        worst = worst
            .max((b.transpose() * b - Matrix2::identity()).amax())
            .max((b.transpose() * n).amax())
            .max((b * b.transpose() - (nalgebra::Matrix3::identity() - n * n.transpose())).amax());
    }
    Ok((worst, vec![]))
}

fn s2_roundtrip(cases: usize, _: &VerifyOptions) -> Result<(f64, Vec<String>)> {
    let mut worst = 0.0f64;
    for (g, mut r) in s2_samples(10, cases) {
        let x: Vector2<f64> = random_in_ball(&mut r, 0.999);
        let back = s2_boxminus(&g, &s2_boxplus(&g, &x)?)?;
        worst = worst.max((back - x).amax());
    }
    Ok((worst, vec![]))
}
