//! Compares the closed-form state matrix `F` and measurement row `H` with
//! finite-difference oracles, for both the default and the alternative forms.

use eqf_lio::eqf::linearization::{build_f, ExtrinsicCoupling, LinearizationOptions};
use eqf_lio::eqf::oracle::{compare_blocks, f_jacobian, h_row, COORD_STEP, TIME_STEP};
use eqf_lio::lie::{Vector6, Vector9};
use eqf_lio::measurement::{build_row, world_point, ExtrinsicRowForm, PlaneFit, PlaneObservation};
use eqf_lio::samples::{random_group, random_input, random_vec3};
use eqf_lio::symmetry::{action_phi, SystemState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> eqf_lio::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_group(&mut rng);
    let mut u = random_input(&mut rng);
    u.bias_drift = Vector9::zeros();
    u.ext_drift = Vector6::zeros();
    let xi = action_phi(&x, &SystemState::origin());
    let oracle = f_jacobian(&x, &u, COORD_STEP, TIME_STEP)?;

    for coupling in [ExtrinsicCoupling::Derived, ExtrinsicCoupling::PrintedZ] {
        let opts = LinearizationOptions {
            extrinsic_coupling: coupling,
            ..Default::default()
        };
        let blocks = compare_blocks(&build_f(&xi, &u, &opts), &oracle);
        let worst = blocks.iter().map(|b| b.rel_error).fold(0.0, f64::max);
        println!("F ({coupling:?}): worst block relative error {worst:.2e}");
        for b in blocks.iter().filter(|b| b.rel_error > 1e-4) {
            println!("    mismatch {} relative {:.2e}", b.label(), b.rel_error);
        }
    }

    let point = random_vec3(&mut rng, 10.0);
    let obs = PlaneObservation {
        point,
        plane: PlaneFit {
            normal: random_vec3(&mut rng, 1.0).normalize(),
            point: world_point(&xi, &point) + random_vec3(&mut rng, 0.2),
            rms: 0.0,
            valid: true,
        },
        variance: 4e-4,
    };
    let fd = h_row(&x, &obs, 1e-6);
    for form in [ExtrinsicRowForm::Derived, ExtrinsicRowForm::Printed] {
        let (_, h) = build_row(&xi, &obs, f64::INFINITY, form)?;
        let diff = h - fd;
        println!(
            "H ({form:?}): max abs error {:.2e} (navigation {:.2e}, extrinsic {:.2e})",
            diff.amax(),
            diff.columns(0, 9).amax(),
            diff.columns(18, 6).amax()
        );
    }
    Ok(())
}
