use nalgebra::{RowSVector, Vector3};

use super::plane::PlaneFit;
use crate::error::{Error, Result};
use crate::lie::hat3;
use crate::symmetry::SystemState;

pub type Row24 = RowSVector<f64, 24>;
pub type Row21 = RowSVector<f64, 21>;

/// How the extrinsic block of the measurement row is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrinsicRowForm {
    /// `[-nᵀ(pʷ − r̂)^∧, nᵀ]`, the linearization of the point-to-plane residual.
    #[default]
    Derived,
    /// `[-nᵀ(pʷ)^∧, nᵀ]`.
    Printed,
}

/// A de-skewed LiDAR point matched to a local map plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneObservation {
    /// Point in the LiDAR frame at the scan end time.
    pub point: Vector3<f64>,
    pub plane: PlaneFit,
    /// Residual variance (m²).
    pub variance: f64,
}

/// World position of a LiDAR-frame point under the state.
pub fn world_point(xi: &SystemState, p: &Vector3<f64>) -> Vector3<f64> {
    let lidar_in_body = xi.ext.transform_point(p);
    xi.nav.rot.rotate(&lidar_in_body) + xi.nav.pos
}

/// Point-to-plane residual `h = nᵀ(pʷ − q)`.
pub fn residual(xi: &SystemState, obs: &PlaneObservation) -> f64 {
    obs.plane.signed_distance(&world_point(xi, &obs.point))
}

/// Innovation `z = −h(ξ̂)` and the error-coordinate row for the equivariant filter.
pub fn build_row(
    xi_hat: &SystemState,
    obs: &PlaneObservation,
    gate: f64,
    form: ExtrinsicRowForm,
) -> Result<(f64, Row24)> {
    if !obs.plane.valid {
        return Err(Error::InvalidPlane);
    }
    let pw = world_point(xi_hat, &obs.point);
    let h = obs.plane.signed_distance(&pw);
    if !h.is_finite() {
        return Err(Error::NonFiniteInput("plane residual"));
    }
    if h.abs() > gate {
        return Err(Error::GatedOutlier(h));
    }
    let n = obs.plane.normal;
    let mut row = Row24::zeros();
    row.fixed_columns_mut::<3>(0)
        .copy_from(&(-n.transpose() * hat3(&pw)));
    row.fixed_columns_mut::<3>(6).copy_from(&n.transpose());
    let lever = match form {
        ExtrinsicRowForm::Derived => pw - xi_hat.nav.pos,
        ExtrinsicRowForm::Printed => pw,
    };
    row.fixed_columns_mut::<3>(18)
        .copy_from(&(-n.transpose() * hat3(&lever)));
    row.fixed_columns_mut::<3>(21).copy_from(&n.transpose());
    Ok((-h, row))
}

/// Innovation and row in the error-state EKF coordinates
/// `[δθ, δv, δr, δb_g, δb_a, δθ_K, δl]` with body-frame attitude errors.
pub fn build_ekf_row(xi_hat: &SystemState, obs: &PlaneObservation, gate: f64) -> Result<(f64, Row21)> {
    if !obs.plane.valid {
        return Err(Error::InvalidPlane);
    }
    let pw = world_point(xi_hat, &obs.point);
    let h = obs.plane.signed_distance(&pw);
    if !h.is_finite() {
        return Err(Error::NonFiniteInput("plane residual"));
    }
    if h.abs() > gate {
        return Err(Error::GatedOutlier(h));
    }
    let n = obs.plane.normal;
    let c = xi_hat.nav.rot.matrix();
    let ck = xi_hat.ext.rot.matrix();
    let p_body = xi_hat.ext.transform_point(&obs.point);
    let mut row = Row21::zeros();
    row.fixed_columns_mut::<3>(0)
        .copy_from(&(-n.transpose() * c * hat3(&p_body)));
    row.fixed_columns_mut::<3>(6).copy_from(&n.transpose());
    row.fixed_columns_mut::<3>(15)
        .copy_from(&(-n.transpose() * c * ck * hat3(&obs.point)));
    row.fixed_columns_mut::<3>(18)
        .copy_from(&(n.transpose() * c));
    Ok((-h, row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqf::oracle;
    use crate::measurement::plane::PlaneFit;
    use crate::samples::*;
    use crate::symmetry::{action_phi, SystemState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_obs(rng: &mut ChaCha8Rng, xi: &SystemState) -> PlaneObservation {
        let point = random_vec3(rng, 10.0);
        let pw = world_point(xi, &point);
        PlaneObservation {
            point,
            plane: PlaneFit {
                normal: random_vec3(rng, 1.0).normalize(),
                point: pw + random_vec3(rng, 0.3),
                rms: 0.0,
                valid: true,
            },
            variance: 1e-4,
        }
    }

    #[test]
    fn on_plane_gives_zero_innovation() {
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        let xi = random_state(&mut rng);
        let mut obs = random_obs(&mut rng, &xi);
        obs.plane.point = world_point(&xi, &obs.point);
        let (z, _) = build_row(&xi, &obs, 1.0, ExtrinsicRowForm::Derived).unwrap();
        assert!(z.abs() < 1e-12);
    }

    #[test]
    fn derived_row_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for _ in 0..100 {
            let x = random_group(&mut rng);
            let xi = action_phi(&x, &SystemState::origin());
            let obs = random_obs(&mut rng, &xi);
            let (_, row) = build_row(&xi, &obs, 10.0, ExtrinsicRowForm::Derived).unwrap();
            let fd = oracle::h_row(&x, &obs, 1e-6);
            assert!((row - fd).amax() < 1e-5 * fd.amax().max(1.0), "{}", (row - fd).amax());
        }
    }

    #[test]
    fn printed_row_differs_only_in_extrinsic_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let x = random_group(&mut rng);
        let xi = action_phi(&x, &SystemState::origin());
        let obs = random_obs(&mut rng, &xi);
        let (_, row) = build_row(&xi, &obs, 10.0, ExtrinsicRowForm::Printed).unwrap();
        let diff = row - oracle::h_row(&x, &obs, 1e-6);
        assert!(diff.columns(0, 18).amax() < 1e-5);
        assert!(diff.columns(18, 3).amax() > 1e-3);
        assert!(diff.columns(21, 3).amax() < 1e-5);
    }

    #[test]
    fn gate_and_validity() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let xi = random_state(&mut rng);
        let mut obs = random_obs(&mut rng, &xi);
        obs.plane.point = world_point(&xi, &obs.point) + obs.plane.normal * 2.0;
        assert!(matches!(
            build_row(&xi, &obs, 1.0, ExtrinsicRowForm::Derived),
            Err(Error::GatedOutlier(_))
        ));
        obs.plane.valid = false;
        assert!(matches!(
            build_row(&xi, &obs, 10.0, ExtrinsicRowForm::Derived),
            Err(Error::InvalidPlane)
        ));
    }
}
