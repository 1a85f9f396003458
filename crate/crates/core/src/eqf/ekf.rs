//! Error-state EKF baseline on `(C, v, r, b_g, b_a, C_K, l)`.
//!
//! Error coordinates `[δθ, δv, δr, δb_g, δb_a, δθ_K, δl]` with
//! `C = Ĉ exp(δθ)`, `C_K = Ĉ_K exp(δθ_K)` and additive errors elsewhere.

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, Vector3};

use crate::error::{Error, Result};
use crate::lie::{hat3, MatrixLieGroup, Rot3};
use crate::measurement::{build_ekf_row, PlaneObservation};
use crate::symmetry::SystemState;

use super::config::FilterConfig;
use super::kalman::{correct, gate_rows, symmetrize, Correction, MeasurementRow};
use super::{check_step, integrate_nav, LioFilter, UpdateReport};

pub type Matrix21 = SMatrix<f64, 21, 21>;
pub type Vector21 = SMatrix<f64, 21, 1>;

#[derive(Clone, Debug)]
pub struct ErrorStateEkf {
    xi: SystemState,
    gravity: Vector3<f64>,
    cov: DMatrix<f64>,
    config: FilterConfig,
}

/// Applies an error-state correction.
pub fn ekf_retract(xi: &SystemState, d: &Vector21) -> SystemState {
    let mut out = *xi;
    out.nav.rot = (xi.nav.rot * Rot3::exp(&d.fixed_rows::<3>(0).into())).renormalized();
    out.nav.vel += d.fixed_rows::<3>(3);
    out.nav.pos += d.fixed_rows::<3>(6);
    let mut b = out.bias.fixed_rows_mut::<6>(0);
    b += d.fixed_rows::<6>(9);
    out.ext.rot = (xi.ext.rot * Rot3::exp(&d.fixed_rows::<3>(15).into())).renormalized();
    out.ext.trans += d.fixed_rows::<3>(18);
    out
}

/// Error of `truth` relative to `xi` in EKF coordinates.
pub fn ekf_error(xi: &SystemState, truth: &SystemState) -> Result<Vector21> {
    let mut e = Vector21::zeros();
    e.fixed_rows_mut::<3>(0)
        .copy_from(&(xi.nav.rot.transpose() * truth.nav.rot).log()?);
    e.fixed_rows_mut::<3>(3).copy_from(&(truth.nav.vel - xi.nav.vel));
    e.fixed_rows_mut::<3>(6).copy_from(&(truth.nav.pos - xi.nav.pos));
    e.fixed_rows_mut::<6>(9)
        .copy_from(&(truth.bias.fixed_rows::<6>(0) - xi.bias.fixed_rows::<6>(0)));
    e.fixed_rows_mut::<3>(15)
        .copy_from(&(xi.ext.rot.transpose() * truth.ext.rot).log()?);
    e.fixed_rows_mut::<3>(18).copy_from(&(truth.ext.trans - xi.ext.trans));
    Ok(e)
}

/// Continuous-time error dynamics at the estimate.
pub fn ekf_f(xi: &SystemState, gyro: &Vector3<f64>, accel: &Vector3<f64>) -> Matrix21 {
    let c = xi.nav.rot.matrix();
    let w = gyro - xi.gyro_bias();
    let a = accel - xi.accel_bias();
    let mut f = Matrix21::zeros();
    f.fixed_view_mut::<3, 3>(0, 0).copy_from(&-hat3(&w));
    f.fixed_view_mut::<3, 3>(0, 9).copy_from(&-Matrix3::identity());
    f.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-c * hat3(&a)));
    f.fixed_view_mut::<3, 3>(3, 12).copy_from(&-c);
    f.fixed_view_mut::<3, 3>(6, 3).copy_from(&Matrix3::identity());
    f
}

impl ErrorStateEkf {
    pub fn new(initial: &SystemState, gravity: Vector3<f64>, config: FilterConfig) -> Result<Self> {
        config.validate()?;
        if config.estimate_gravity {
            return Err(Error::Config("the EKF baseline does not estimate gravity".into()));
        }
        if !initial.is_finite() || !gravity.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteInput("initial state"));
        }
        let s = &config.initial;
        let sig = [
            s.attitude,
            s.velocity,
            s.position,
            s.gyro_bias,
            s.accel_bias,
            s.extrinsic_rotation,
            s.extrinsic_translation,
        ];
        let cov = DMatrix::from_fn(21, 21, |i, j| if i == j { sig[i / 3].powi(2) } else { 0.0 });
        let mut xi = *initial;
        xi.bias.fixed_rows_mut::<3>(6).fill(0.0);
        Ok(Self {
            xi,
            gravity,
            cov,
            config,
        })
    }

    /// Replaces the error covariance; its size must match the error dimension.
    pub fn set_covariance(&mut self, cov: DMatrix<f64>) -> Result<()> {
        let n = self.error_dim();
        if cov.shape() != (n, n) {
            return Err(Error::Config(format!("covariance must be {n}x{n}")));
        }
        self.cov = cov;
        Ok(())
    }

    fn noise_term(&self, dt: f64) -> Matrix21 {
        let n = &self.config.noise;
        let c = self.xi.nav.rot.matrix();
        let mut q = Matrix21::zeros();
        q.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(Matrix3::identity() * n.gyro.powi(2)));
        q.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(c * c.transpose() * n.accel.powi(2)));
        let walks = [
            (9, n.gyro_bias_walk),
            (12, n.accel_bias_walk),
            (15, n.extrinsic_drift),
            (18, n.extrinsic_drift),
        ];
        for (k, d) in walks {
            q.fixed_view_mut::<3, 3>(k, k)
                .copy_from(&(Matrix3::identity() * d * d));
        }
        q * dt
    }
}

impl LioFilter for ErrorStateEkf {
    fn name(&self) -> &'static str {
        "ekf"
    }

    fn propagate(&mut self, gyro: &Vector3<f64>, accel: &Vector3<f64>, dt: f64) -> Result<()> {
        check_step(gyro, accel, dt)?;
        let f = ekf_f(&self.xi, gyro, accel) * dt;
        let phi = if self.config.exact_transition {
            f.exp()
        } else {
            Matrix21::identity() + f + f * f * 0.5
        };
        let phi = DMatrix::from_column_slice(21, 21, phi.as_slice());
        let q = self.noise_term(dt);
        let cov = &phi * &self.cov * phi.transpose() + DMatrix::from_column_slice(21, 21, q.as_slice());
        self.cov = symmetrize(&cov);

        let b = &self.xi.bias;
        let omega = gyro - b.fixed_rows::<3>(0);
        let acc = accel - b.fixed_rows::<3>(3);
        self.xi.nav = integrate_nav(&self.xi.nav, &omega, &acc, &Vector3::zeros(), &self.gravity, dt);
        self.xi.nav.rot = self.xi.nav.rot.renormalized();
        if !self.xi.is_finite() {
            return Err(Error::NonFiniteInput("propagated state"));
        }
        Ok(())
    }

    fn update(
        &mut self,
        associate: &mut dyn FnMut(&SystemState) -> Result<Vec<PlaneObservation>>,
    ) -> Result<UpdateReport> {
        let x0 = self.xi;
        let mut eps = DVector::zeros(21);
        let mut last: Option<Correction> = None;
        let mut report = UpdateReport::default();
        for it in 0..self.config.max_iterations {
            let xi_i = ekf_retract(&x0, &Vector21::from_column_slice(eps.as_slice()));
            let obs = associate(&xi_i)?;
            let mut rejected = 0;
            let mut rows = Vec::with_capacity(obs.len());
            for o in &obs {
                match build_ekf_row(&xi_i, o, self.config.gate) {
                    Ok((z, h)) => rows.push(MeasurementRow {
                        z,
                        h: DVector::from_row_slice(h.as_slice()),
                        r: o.variance,
                    }),
                    Err(Error::GatedOutlier(_)) | Err(Error::InvalidPlane) => rejected += 1,
                    Err(e) => return Err(e),
                }
            }
            rejected += gate_rows(&mut rows, &self.cov, Some(&eps), self.config.chi2_gate);
            if rows.is_empty() {
                if last.is_none() {
                    return Err(Error::NoMeasurements);
                }
                break;
            }
            let c = correct(&self.cov, &rows, Some(&eps))?;
            let step = (&c.delta - &eps).norm();
            eps = c.delta.clone();
            report = UpdateReport {
                rows: rows.len(),
                rejected,
                iterations: it + 1,
                condition: c.condition,
            };
            last = Some(c);
            if step < self.config.convergence {
                break;
            }
        }
        let c = last.ok_or(Error::NoMeasurements)?;
        self.xi = ekf_retract(&x0, &Vector21::from_column_slice(eps.as_slice()));
        self.cov = c.covariance;
        Ok(report)
    }

    fn state(&self) -> SystemState {
        self.xi
    }

    fn gravity(&self) -> Vector3<f64> {
        self.gravity
    }

    fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn error_dim(&self) -> usize {
        21
    }

    fn nees(&self, truth: &SystemState, _gravity: &Vector3<f64>) -> Result<f64> {
        let e = ekf_error(&self.xi, truth)?;
        super::mahalanobis(&self.cov, &DVector::from_column_slice(e.as_slice()))
    }
}
