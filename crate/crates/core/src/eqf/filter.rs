use nalgebra::{DMatrix, DVector, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::lie::{hat3, MatrixLieGroup};
use crate::measurement::{build_row, PlaneObservation};
use crate::symmetry::{action_phi, transport, GroupElement, SystemInput, SystemState, Vector24};

use super::config::FilterConfig;
use super::gravity::{build_bg, s2_boxminus, s2_boxplus, GravityDir};
use super::kalman::{correct, gate_rows, Correction, MeasurementRow};
use super::linearization::{build_f, correction, error_coordinates, noise_input, transition};
use super::{check_step, integrate_nav, LioFilter, UpdateReport};

const RENORMALIZE_EVERY: u64 = 100;

/// Equivariant filter on the LiDAR-inertial symmetry group.
///
/// The estimate is a group element `X̂`; the state estimate is
/// `ξ̂ = φ(X̂, ξ⁰)`. With gravity estimation enabled, the error state gains the
/// two S² coordinates of the gravity "up" direction.
#[derive(Clone, Debug)]
pub struct EqFilter {
    x_hat: GroupElement,
    /// Unit vector opposite to gravity, with the gravity magnitude.
    up: GravityDir,
    cov: DMatrix<f64>,
    config: FilterConfig,
    steps: u64,
}

/// Maps a covariance in retraction coordinates of `ξ̂` into error coordinates.
///
/// Right perturbations `T̂ exp(δ)`, `b̂ + δ_b`, `K̂ exp(δ_K)` appear in the error
/// as `Ad_{T̂} δ`, `Ad_{T̂} δ_b` and `Ad_{B̂} δ_K`.
pub fn retraction_to_error(x_hat: &GroupElement) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(24, 24);
    let ad_t = x_hat.nav.adjoint();
    j.view_mut((0, 0), (9, 9)).copy_from(&ad_t);
    j.view_mut((9, 9), (9, 9)).copy_from(&ad_t);
    j.view_mut((18, 18), (6, 6)).copy_from(&x_hat.ext.adjoint());
    j
}

impl EqFilter {
    /// Starts at `initial` with the configured initial uncertainty, expressed
    /// in the retraction coordinates of `initial`. `gravity` is the gravity
    /// vector in the world frame.
    pub fn new(initial: &SystemState, gravity: Vector3<f64>, config: FilterConfig) -> Result<Self> {
        config.validate()?;
        if !initial.is_finite() || !gravity.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteInput("initial state"));
        }
        let x_hat = transport(&SystemState::origin(), initial);
        let j = retraction_to_error(&x_hat);
        let cov24 = &j * config.initial.covariance24() * j.transpose();
        let cov = if config.estimate_gravity {
            let mut cov = DMatrix::zeros(26, 26);
            cov.view_mut((0, 0), (24, 24)).copy_from(&cov24);
            let s2 = config.initial.gravity.powi(2);
            cov[(24, 24)] = s2;
            cov[(25, 25)] = s2;
            cov
        } else {
            cov24
        };
        Ok(Self {
            x_hat,
            up: GravityDir::new(-gravity, gravity.norm()),
            cov,
            config,
            steps: 0,
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

    pub fn group_estimate(&self) -> &GroupElement {
        &self.x_hat
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    fn extended(&self) -> bool {
        self.config.estimate_gravity
    }

    /// Columns of `F` coupling the navigation error to the gravity error.
    ///
    /// A direction error `x` tilts the true gravity by `m û^∧ B_û x`, which
    /// enters the velocity error rate directly.
    pub fn gravity_coupling(&self) -> Result<nalgebra::Matrix3x2<f64>> {
        Ok(hat3(self.up.dir()) * build_bg(&self.up)? * self.up.magnitude)
    }

    /// Error coordinates of `truth` relative to the estimate (with the gravity
    /// error appended when estimated).
    pub fn error_of(&self, truth: &SystemState, gravity: &Vector3<f64>) -> Result<DVector<f64>> {
        let eps: Vector24 = error_coordinates(&self.x_hat, truth)?;
        let mut out = DVector::zeros(self.error_dim());
        out.rows_mut(0, 24).copy_from(&eps);
        if self.extended() {
            let eg = s2_boxminus(&self.up, &GravityDir::unit(-gravity))?;
            out.rows_mut(24, 2).copy_from(&eg);
        }
        Ok(out)
    }

    fn iterate_rows(
        &self,
        xi: &SystemState,
        obs: &[PlaneObservation],
        gated: &mut usize,
    ) -> Result<Vec<MeasurementRow>> {
        let n = self.error_dim();
        let mut rows = Vec::with_capacity(obs.len());
        for o in obs {
            match build_row(xi, o, self.config.gate, self.config.extrinsic_row) {
                Ok((z, h)) => {
                    let mut hv = DVector::zeros(n);
                    hv.rows_mut(0, 24).copy_from(&h.transpose());
                    rows.push(MeasurementRow { z, h: hv, r: o.variance });
                }
                Err(Error::GatedOutlier(_)) | Err(Error::InvalidPlane) => *gated += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(rows)
    }
}

fn head24(v: &DVector<f64>) -> Vector24 {
    Vector24::from_iterator(v.rows(0, 24).iter().copied())
}

impl LioFilter for EqFilter {
    fn name(&self) -> &'static str {
        "eqf"
    }

    fn propagate(&mut self, gyro: &Vector3<f64>, accel: &Vector3<f64>, dt: f64) -> Result<()> {
        check_step(gyro, accel, dt)?;
        let xi = self.state();
        let u = SystemInput::from_imu(*gyro, *accel, self.gravity());
        let f = build_f(&xi, &u, &self.config.linearization());
        let g = noise_input(&self.x_hat);
        let q = self.config.noise.spectral_diag();
        let gq = g * nalgebra::SMatrix::<f64, 21, 21>::from_diagonal(&q) * g.transpose() * dt;
        let n = self.error_dim();
        let mut f_dyn = DMatrix::zeros(n, n);
        f_dyn.view_mut((0, 0), (24, 24)).copy_from(&f);
        if self.extended() {
            f_dyn.view_mut((3, 24), (3, 2)).copy_from(&self.gravity_coupling()?);
        }
        let phi = if self.extended() {
            let fd = f_dyn * dt;
            if self.config.exact_transition {
                fd.exp()
            } else {
                DMatrix::identity(n, n) + &fd + &fd * &fd * 0.5
            }
        } else {
            let p = transition(&f, dt, self.config.exact_transition);
            DMatrix::from_column_slice(24, 24, p.as_slice())
        };
        let mut cov = &phi * &self.cov * phi.transpose();
        let mut noise = cov.view_mut((0, 0), (24, 24));
        noise += gq;
        self.cov = super::kalman::symmetrize(&cov);

        let corrected = u.imu - xi.bias;
        let nav = integrate_nav(
            &xi.nav,
            &corrected.fixed_rows::<3>(0).into(),
            &corrected.fixed_rows::<3>(3).into(),
            &corrected.fixed_rows::<3>(6).into(),
            &u.gravity,
            dt,
        );
        let next = SystemState::new(nav, xi.bias, xi.ext);
        self.x_hat = transport(&SystemState::origin(), &next);
        self.steps += 1;
        if self.steps % RENORMALIZE_EVERY == 0 {
            self.x_hat = self.x_hat.renormalized();
        }
        if !self.state().is_finite() {
            return Err(Error::NonFiniteInput("propagated state"));
        }
        Ok(())
    }

    fn update(
        &mut self,
        associate: &mut dyn FnMut(&SystemState) -> Result<Vec<PlaneObservation>>,
    ) -> Result<UpdateReport> {
        let x0 = self.x_hat;
        let mut eps = DVector::zeros(self.error_dim());
        let mut last: Option<(Correction, usize)> = None;
        let mut report = UpdateReport::default();
        for it in 0..self.config.max_iterations {
            let x_i = correction(&head24(&eps)).compose(&x0);
            let xi_i = action_phi(&x_i, &SystemState::origin());
            let obs = associate(&xi_i)?;
            let mut gated = 0;
            let mut rows = self.iterate_rows(&xi_i, &obs, &mut gated)?;
            gated += gate_rows(&mut rows, &self.cov, Some(&eps), self.config.chi2_gate);
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
                rejected: gated,
                iterations: it + 1,
                condition: c.condition,
            };
            last = Some((c, rows.len()));
            if step < self.config.convergence {
                break;
            }
        }
        let (c, _) = last.ok_or(Error::NoMeasurements)?;
        self.x_hat = correction(&head24(&eps)).compose(&x0).renormalized();
        if self.extended() {
            let eg = Vector2::new(eps[24], eps[25]);
            self.up = s2_boxplus(&self.up, &eg)?;
        }
        self.cov = c.covariance;
        Ok(report)
    }

    fn state(&self) -> SystemState {
        action_phi(&self.x_hat, &SystemState::origin())
    }

    fn gravity(&self) -> Vector3<f64> {
        -self.up.vector()
    }

    fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn error_dim(&self) -> usize {
        if self.extended() {
            26
        } else {
            24
        }
    }

    fn nees(&self, truth: &SystemState, gravity: &Vector3<f64>) -> Result<f64> {
        let e = self.error_of(truth, gravity)?;
        super::mahalanobis(&self.cov, &e)
    }
}
