//! Finite-difference oracles for the closed-form linearizations.
//!
//! The error-dynamics oracle differentiates
//! `t ↦ chart(φ(X̂(t)⁻¹, ξ(t)))` where the true state follows the system
//! vector field and the estimate follows the lifted system. Both curves are
//! exponential curves with the correct velocity at `t = 0`, which is all a
//! central difference in time needs.

use crate::error::Result;
use crate::measurement::{residual, PlaneObservation, Row24};
use crate::symmetry::{action_phi, lift, system_field, GroupElement, SystemInput, SystemState, Vector24};

use super::linearization::{chart_inverse, error_coordinates, Matrix24};

/// Time step of the inner central difference.
pub const TIME_STEP: f64 = 1e-4;
/// Coordinate step of the outer central difference.
pub const COORD_STEP: f64 = 1e-4;

/// `ε̇` at error `ε` for the estimate `X̂` and input `u`.
pub fn error_rate(x_hat: &GroupElement, eps: &Vector24, u: &SystemInput, h: f64) -> Result<Vector24> {
    let xi = action_phi(x_hat, &chart_inverse(eps));
    let field = system_field(&xi, u);
    let lam = lift(&action_phi(x_hat, &SystemState::origin()), u);
    let at = |s: f64| -> Result<Vector24> {
        let x = x_hat.compose(&GroupElement::exp(&lam.scale(s)));
        error_coordinates(&x, &xi.retract(&field.scale(s)))
    };
    Ok((at(h)? - at(-h)?) / (2.0 * h))
}

/// Central-difference Jacobian of [`error_rate`] at `ε = 0`.
pub fn f_jacobian(x_hat: &GroupElement, u: &SystemInput, step: f64, h: f64) -> Result<Matrix24> {
    let mut jac = Matrix24::zeros();
    for j in 0..24 {
        let mut d = Vector24::zeros();
        d[j] = step;
        let col = (error_rate(x_hat, &d, u, h)? - error_rate(x_hat, &(-d), u, h)?) / (2.0 * step);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Central-difference row of `ε ↦ h(φ(X̂, chart⁻¹(ε)))` at `ε = 0`.
pub fn h_row(x_hat: &GroupElement, obs: &PlaneObservation, step: f64) -> Row24 {
    let mut row = Row24::zeros();
    for j in 0..24 {
        let mut d = Vector24::zeros();
        d[j] = step;
        let plus = residual(&action_phi(x_hat, &chart_inverse(&d)), obs);
        let minus = residual(&action_phi(x_hat, &chart_inverse(&(-d))), obs);
        row[j] = (plus - minus) / (2.0 * step);
    }
    row
}

/// Names of the 3×3 sub-blocks along each axis of the error vector.
pub const BLOCK_NAMES: [&str; 8] = ["θ", "ν", "ρ", "b_ω", "b_a", "b_μ", "θ_K", "l_K"];

/// Mismatch of one 3×3 block between a closed form and an oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiscrepancy {
    pub row: usize,
    pub col: usize,
    pub abs_error: f64,
    pub rel_error: f64,
}

impl BlockDiscrepancy {
    pub fn label(&self) -> String {
        format!(
            "F[{}..{}, {}..{}] ({} ← {})",
            3 * self.row,
            3 * self.row + 3,
            3 * self.col,
            3 * self.col + 3,
            BLOCK_NAMES[self.row],
            BLOCK_NAMES[self.col]
        )
    }
}

/// Per-block comparison. The relative error of a block is its max-abs
/// difference over `max(1, max-abs of the oracle block)`.
pub fn compare_blocks(closed: &Matrix24, oracle: &Matrix24) -> Vec<BlockDiscrepancy> {
    let mut out = Vec::with_capacity(64);
    for row in 0..8 {
        for col in 0..8 {
            let a = closed.fixed_view::<3, 3>(3 * row, 3 * col);
            let b = oracle.fixed_view::<3, 3>(3 * row, 3 * col);
            let abs_error = (a - b).amax();
            out.push(BlockDiscrepancy {
                row,
                col,
                abs_error,
                rel_error: abs_error / b.amax().max(1.0),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqf::linearization::{build_f, ExtrinsicCoupling, LinearizationOptions};
    use crate::lie::Vector6;
    use crate::lie::Vector9;
    use crate::samples::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clean_input(rng: &mut ChaCha8Rng) -> SystemInput {
        let mut u = random_input(rng);
        u.bias_drift = Vector9::zeros();
        u.ext_drift = Vector6::zeros();
        u
    }

    #[test]
    fn error_rate_vanishes_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for _ in 0..20 {
            let x = random_group(&mut rng);
            let u = clean_input(&mut rng);
            let r = error_rate(&x, &Vector24::zeros(), &u, TIME_STEP).unwrap();
            assert!(r.amax() < 1e-7, "{}", r.amax());
        }
    }

    #[test]
    fn closed_form_f_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..20 {
            let x = random_group(&mut rng);
            let u = clean_input(&mut rng);
            let xi_hat = action_phi(&x, &SystemState::origin());
            let fd = f_jacobian(&x, &u, COORD_STEP, TIME_STEP).unwrap();
            let f = build_f(&xi_hat, &u, &LinearizationOptions::default());
            for d in compare_blocks(&f, &fd) {
                assert!(d.rel_error < 1e-4, "{} off by {:.3e}", d.label(), d.rel_error);
            }
        }
    }

    #[test]
    fn printed_extrinsic_coupling_disagrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let x = random_group(&mut rng);
        let u = clean_input(&mut rng);
        let xi_hat = action_phi(&x, &SystemState::origin());
        let fd = f_jacobian(&x, &u, COORD_STEP, TIME_STEP).unwrap();
        let opts = LinearizationOptions {
            extrinsic_coupling: ExtrinsicCoupling::PrintedZ,
            ..Default::default()
        };
        let bad: Vec<_> = compare_blocks(&build_f(&xi_hat, &u, &opts), &fd)
            .into_iter()
            .filter(|d| d.rel_error > 1e-4)
            .map(|d| (d.row, d.col))
            .collect();
        assert_eq!(bad, vec![(7, 6)]);
    }
}
