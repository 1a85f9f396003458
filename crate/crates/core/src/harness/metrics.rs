use nalgebra::{Matrix3, Matrix6, Vector3};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::lie::MatrixLieGroup;
use crate::symmetry::SystemState;

/// Filter output after one scan update.
#[derive(Clone, Debug)]
pub struct Epoch {
    pub t: f64,
    pub truth: SystemState,
    pub estimate: SystemState,
    pub nees: f64,
    /// Covariance of `(b_g, b_a)` in the body frame.
    pub bias_covariance: Matrix6<f64>,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub filter: String,
    pub epochs: usize,
    /// Position RMSE after a best-fit rigid alignment (m).
    pub ate_rmse: f64,
    /// Position RMSE in the world frame without alignment (m).
    pub ate_rmse_unaligned: f64,
    /// Position error at the last epoch (m).
    pub end_to_end: f64,
    pub gyro_bias_error: [f64; 3],
    pub gyro_bias_sigma: [f64; 3],
    pub accel_bias_error: [f64; 3],
    pub accel_bias_sigma: [f64; 3],
    pub extrinsic_rotation_error_deg: f64,
    pub extrinsic_translation_error: f64,
    pub nees_dof: usize,
    pub nees_mean: f64,
    /// Two-sided 95% χ² interval for `nees_dof` degrees of freedom.
    pub nees_band: [f64; 2],
    pub nees_band_fraction: f64,
    /// Mean wall-clock time per scan (ms); only present when timing is enabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms_per_scan: Option<f64>,
}

impl MetricsReport {
    /// Gyro bias error within `k` standard deviations on every axis.
    pub fn gyro_bias_within(&self, k: f64) -> bool {
        self.gyro_bias_error
            .iter()
            .zip(&self.gyro_bias_sigma)
            .all(|(e, s)| e.abs() <= k * s)
    }
}

/// Two-sided `1 − alpha` interval of the χ² distribution.
pub fn chi2_band(dof: usize, alpha: f64) -> Result<[f64; 2]> {
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Config(e.to_string()))?;
    Ok([dist.inverse_cdf(alpha / 2.0), dist.inverse_cdf(1.0 - alpha / 2.0)])
}

/// Best rigid transform `(R, t)` minimizing `Σ ‖R a_i + t − b_i‖²`.
pub fn rigid_align(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> (Matrix3<f64>, Vector3<f64>) {
    let n = a.len().max(1) as f64;
    let ca = a.iter().sum::<Vector3<f64>>() / n;
    let cb = b.iter().sum::<Vector3<f64>>() / n;
    let mut h = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        h += (q - cb) * (p - ca).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (u * vt).determinant().signum();
    let r = u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * vt;
    (r, cb - r * ca)
}

fn rmse(errors: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = errors.fold((0.0, 0usize), |(s, n), e| (s + e * e, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

pub fn compute_metrics(filter: &str, dof: usize, epochs: &[Epoch], wall_ms_per_scan: Option<f64>) -> Result<MetricsReport> {
    let last = epochs
        .last()
        .ok_or_else(|| Error::DatasetCorrupt("run produced no filter epochs".into()))?;
    let est: Vec<_> = epochs.iter().map(|e| e.estimate.nav.pos).collect();
    let truth: Vec<_> = epochs.iter().map(|e| e.truth.nav.pos).collect();
    let (r, t) = rigid_align(&est, &truth);
    let ate_rmse = rmse(est.iter().zip(&truth).map(|(p, q)| (r * p + t - q).norm()));
    let ate_rmse_unaligned = rmse(est.iter().zip(&truth).map(|(p, q)| (p - q).norm()));

    let bias_err = last.truth.bias - last.estimate.bias;
    let sig = |i: usize| last.bias_covariance[(i, i)].max(0.0).sqrt();
    let ext_rot = (last.estimate.ext.rot.transpose() * last.truth.ext.rot).log()?;

    let band = chi2_band(dof, 0.05)?;
    let inside = epochs
        .iter()
        .filter(|e| (band[0]..=band[1]).contains(&e.nees))
        .count();
    let nees_mean = epochs.iter().map(|e| e.nees).sum::<f64>() / epochs.len() as f64;

    Ok(MetricsReport {
        filter: filter.to_string(),
        epochs: epochs.len(),
        ate_rmse,
        ate_rmse_unaligned,
        end_to_end: (last.estimate.nav.pos - last.truth.nav.pos).norm(),
        gyro_bias_error: [bias_err[0], bias_err[1], bias_err[2]],
        gyro_bias_sigma: [sig(0), sig(1), sig(2)],
        accel_bias_error: [bias_err[3], bias_err[4], bias_err[5]],
        accel_bias_sigma: [sig(3), sig(4), sig(5)],
        extrinsic_rotation_error_deg: ext_rot.norm().to_degrees(),
        extrinsic_translation_error: (last.estimate.ext.trans - last.truth.ext.trans).norm(),
        nees_dof: dof,
        nees_mean,
        nees_band: band,
        nees_band_fraction: inside as f64 / epochs.len() as f64,
        wall_ms_per_scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Rot3;
    use approx::assert_relative_eq;

    #[test]
    fn chi2_band_24() {
        let [lo, hi] = chi2_band(24, 0.05).unwrap();
        assert_relative_eq!(lo, 12.401, epsilon = 1e-3);
        assert_relative_eq!(hi, 39.364, epsilon = 1e-3);
    }

    #[test]
    fn alignment_recovers_rigid_motion() {
        let r = *Rot3::from_euler_zyx(0.3, -0.2, 0.1).matrix();
        let t = Vector3::new(1.0, -2.0, 0.5);
        let a: Vec<_> = (0..20)
            .map(|i| Vector3::new((i as f64).sin() * 3.0, (i as f64 * 0.7).cos(), i as f64 * 0.1))
            .collect();
        let b: Vec<_> = a.iter().map(|p| r * p + t).collect();
        let (rr, tt) = rigid_align(&a, &b);
        assert_relative_eq!(rr, r, epsilon = 1e-10);
        assert_relative_eq!(tt, t, epsilon = 1e-10);
    }
}
