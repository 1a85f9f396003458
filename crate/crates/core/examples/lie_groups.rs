//! Exponential/log round trips on SE₂(3), the symmetry group actions and the
//! equivariance of the system, evaluated at a few random points.

use eqf_lio::lie::{ExtendedPose, MatrixLieGroup, Vector9};
use eqf_lio::samples::{random_group, random_input, random_state, random_vec9};
use eqf_lio::symmetry::{action_phi, check_equivariance, lift_residual, transport, FD_STEP};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> eqf_lio::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let v: Vector9 = random_vec9(&mut rng, 1.0);
    let x = ExtendedPose::exp(&v);
    println!("SE2(3) exp/log round trip: {:.2e}", (x.log()? - v).amax());

    for case in 0..3 {
        let x = random_group(&mut rng);
        let y = random_group(&mut rng);
        let xi = random_state(&mut rng);
        let u = random_input(&mut rng);

        // φ is a right action: φ(Y, φ(X, ξ)) = φ(XY, ξ).
        let lhs = action_phi(&y, &action_phi(&x, &xi));
        let rhs = action_phi(&x.compose(&y), &xi);
        let action = (lhs.nav.to_matrix() - rhs.nav.to_matrix()).amax();

        // The action is transitive: some group element carries ξ to any target.
        let target = random_state(&mut rng);
        let moved = action_phi(&transport(&xi, &target), &xi);
        let reach = (moved.nav.to_matrix() - target.nav.to_matrix()).amax();

        println!(
            "case {case}: action law {action:.1e}, transitivity {reach:.1e}, equivariance {:.1e}, lift {:.1e}",
            check_equivariance(&x, &xi, &u)?,
            lift_residual(&xi, &u, FD_STEP)?
        );
    }
    Ok(())
}
