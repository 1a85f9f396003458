use nalgebra::{DMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::ExtrinsicRowForm;

use super::linearization::{ExtrinsicCoupling, LinearizationOptions};

/// Continuous-time noise densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Gyroscope white noise, (rad/s)/√Hz.
    pub gyro: f64,
    /// Accelerometer white noise, (m/s²)/√Hz.
    pub accel: f64,
    /// Gyroscope bias random walk, (rad/s²)/√Hz.
    pub gyro_bias_walk: f64,
    /// Accelerometer bias random walk, (m/s³)/√Hz.
    pub accel_bias_walk: f64,
    /// Random walk of the virtual velocity bias.
    pub vel_bias_walk: f64,
    /// Extrinsic drift (rad/√s for rotation, m/√s for translation).
    pub extrinsic_drift: f64,
    /// LiDAR range noise, m (one sigma).
    pub lidar_sigma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            gyro: 1e-3,
            accel: 1e-2,
            gyro_bias_walk: 1e-5,
            accel_bias_walk: 1e-4,
            vel_bias_walk: 1e-4,
            extrinsic_drift: 0.0,
            lidar_sigma: 0.02,
        }
    }
}

impl NoiseConfig {
    /// Zero process noise; the LiDAR sigma stays positive so updates remain defined.
    pub fn noiseless() -> Self {
        Self {
            gyro: 0.0,
            accel: 0.0,
            gyro_bias_walk: 0.0,
            accel_bias_walk: 0.0,
            vel_bias_walk: 0.0,
            extrinsic_drift: 0.0,
            lidar_sigma: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.gyro,
            self.accel,
            self.gyro_bias_walk,
            self.accel_bias_walk,
            self.vel_bias_walk,
            self.extrinsic_drift,
            self.lidar_sigma,
        ];
        match all.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            Some(bad) => Err(Error::InvalidNoise(*bad)),
            None => Ok(()),
        }
    }

    /// Spectral densities squared, in the channel order of the noise-input matrix.
    pub fn spectral_diag(&self) -> SVector<f64, 21> {
        let mut q = SVector::<f64, 21>::zeros();
        let blocks = [
            self.gyro,
            self.accel,
            self.gyro_bias_walk,
            self.accel_bias_walk,
            self.vel_bias_walk,
            self.extrinsic_drift,
            self.extrinsic_drift,
        ];
        for (k, d) in blocks.iter().enumerate() {
            q.fixed_rows_mut::<3>(3 * k).fill(d * d);
        }
        q
    }
}

/// One-sigma initial uncertainty per physical block (isotropic).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSigma {
    pub attitude: f64,
    pub velocity: f64,
    pub position: f64,
    pub gyro_bias: f64,
    pub accel_bias: f64,
    pub vel_bias: f64,
    pub extrinsic_rotation: f64,
    pub extrinsic_translation: f64,
    /// Gravity direction (rad), used only with gravity estimation.
    pub gravity: f64,
}

impl Default for InitialSigma {
    fn default() -> Self {
        Self {
            attitude: 0.01,
            velocity: 0.05,
            position: 0.01,
            gyro_bias: 0.005,
            accel_bias: 0.05,
            vel_bias: 1e-3,
            extrinsic_rotation: 0.02,
            extrinsic_translation: 0.05,
            gravity: 0.01,
        }
    }
}

impl InitialSigma {
    /// Diagonal covariance in `[θ, v, r, b_g, b_a, b_μ, θ_K, l_K]` order.
    pub fn covariance24(&self) -> DMatrix<f64> {
        let s = [
            self.attitude,
            self.velocity,
            self.position,
            self.gyro_bias,
            self.accel_bias,
            self.vel_bias,
            self.extrinsic_rotation,
            self.extrinsic_translation,
        ];
        DMatrix::from_fn(24, 24, |i, j| if i == j { s[i / 3].powi(2) } else { 0.0 })
    }
}

/// Filter options shared by the equivariant filter and the EKF baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub noise: NoiseConfig,
    pub initial: InitialSigma,
    /// Maximum Gauss-Newton iterations per scan update.
    pub max_iterations: usize,
    /// Stop iterating once the correction step is below this norm.
    pub convergence: f64,
    /// Innovation gate on the point-to-plane residual (m).
    pub gate: f64,
    /// Rows whose squared innovation exceeds this many predicted variances
    /// are dropped. Zero disables the test.
    pub chi2_gate: f64,
    /// Use `exp(F dt)` instead of the 3-term series.
    pub exact_transition: bool,
    /// Estimate the gravity direction on S² (+2 error states).
    pub estimate_gravity: bool,
    pub extrinsic_coupling: ExtrinsicCoupling,
    pub extrinsic_row: ExtrinsicRowForm,
    /// Negates the `g^∧` block of `F` (mutation check).
    pub flip_gravity_block: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            noise: NoiseConfig::default(),
            initial: InitialSigma::default(),
            max_iterations: 4,
            convergence: 1e-6,
            gate: 1.0,
            chi2_gate: 9.0,
            exact_transition: false,
            estimate_gravity: false,
            extrinsic_coupling: ExtrinsicCoupling::Derived,
            extrinsic_row: ExtrinsicRowForm::Derived,
            flip_gravity_block: false,
        }
    }
}

impl FilterConfig {
    pub fn linearization(&self) -> LinearizationOptions {
        LinearizationOptions {
            extrinsic_coupling: self.extrinsic_coupling,
            flip_gravity_block: self.flip_gravity_block,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.gate > 0.0) {
            return Err(Error::Config(format!("gate must be positive, got {}", self.gate)));
        }
        if !(self.chi2_gate >= 0.0) {
            return Err(Error::Config(format!("chi2_gate must be non-negative, got {}", self.chi2_gate)));
        }
        Ok(())
    }
}
