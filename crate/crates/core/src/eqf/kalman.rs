//! Linear Kalman correction in square-root form.
//!
//! With `Σ = L Lᵀ`, `M = H L` and diagonal `R`, the gain is
//! `K = L (I + Mᵀ R⁻¹ M)⁻¹ Mᵀ R⁻¹` and the posterior `Σ⁺ = L (I + Mᵀ R⁻¹ M)⁻¹ Lᵀ`,
//! which equals `(I − K H) Σ`. Only state-sized systems are factored, so a
//! scan contributing hundreds of rows stays cheap.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition number of the whitened innovation above which an update is refused.
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

/// Eigenvalue floor applied to posterior covariances.
pub const COVARIANCE_FLOOR: f64 = 1e-12;

/// One scalar measurement row `z = H ε + n`, `n ~ N(0, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRow {
    pub z: f64,
    pub h: DVector<f64>,
    pub r: f64,
}

#[derive(Clone, Debug)]
pub struct Correction {
    /// Posterior error-coordinate mean.
    pub delta: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// Condition number of `R^{-1/2} (H Σ Hᵀ + R) R^{-1/2}` (upper bound).
    pub condition: f64,
}

/// Symmetric square root factor `L` with `L Lᵀ = Σ` (negative eigenvalues clipped).
pub fn sqrt_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = cov.clone().symmetric_eigen();
    let mut l = eig.eigenvectors;
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        l.column_mut(j).scale_mut(s);
    }
    l
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetrizes and clamps eigenvalues from below at `floor`.
pub fn clamp_covariance(cov: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = symmetrize(cov);
    let eig = sym.clone().symmetric_eigen();
    if eig.eigenvalues.min() >= floor {
        return sym;
    }
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(floor)));
    symmetrize(&(v * d * v.transpose()))
}

/// Drops rows with `(z + h·prior)² > threshold · (hᵀ Σ h + r)` and returns
/// how many were dropped. A zero threshold keeps everything.
pub fn gate_rows(
    rows: &mut Vec<MeasurementRow>,
    cov: &DMatrix<f64>,
    prior: Option<&DVector<f64>>,
    threshold: f64,
) -> usize {
    if threshold <= 0.0 {
        return 0;
    }
    let before = rows.len();
    rows.retain(|row| {
        let v = row.z + prior.map_or(0.0, |p| row.h.dot(p));
        let s = (cov * &row.h).dot(&row.h) + row.r;
        v * v <= threshold * s
    });
    before - rows.len()
}

/// Gain applied to `z + H·prior` where `prior` is the current iterate
/// (zero for a plain linear update).
pub fn correct(
    cov: &DMatrix<f64>,
    rows: &[MeasurementRow],
    prior: Option<&DVector<f64>>,
) -> Result<Correction> {
    if rows.is_empty() {
        return Err(Error::NoMeasurements);
    }
    let n = cov.nrows();
    let m = rows.len();
    let mut h = DMatrix::zeros(m, n);
    let mut innov = DVector::zeros(m);
    let mut r_inv = DVector::zeros(m);
    for (i, row) in rows.iter().enumerate() {
        if !(row.r > 0.0) || !row.r.is_finite() {
            return Err(Error::InvalidNoise(row.r));
        }
        if !row.z.is_finite() || row.h.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput("measurement row"));
        }
        h.row_mut(i).copy_from(&row.h.transpose());
        innov[i] = row.z;
        r_inv[i] = 1.0 / row.r;
    }
    if let Some(p) = prior {
        innov += &h * p;
    }

    let l = sqrt_factor(cov);
    let mm = &h * &l;
    let mut weighted = mm.clone();
    for (i, mut row) in weighted.row_iter_mut().enumerate() {
        row.scale_mut(r_inv[i]);
    }
    let info = DMatrix::identity(n, n) + mm.transpose() * &weighted;
    let info = symmetrize(&info);
    let eig = info.clone().symmetric_eigen();
    let condition = eig.eigenvalues.max() / eig.eigenvalues.min().min(1.0);
    if !condition.is_finite() || condition > MAX_INNOVATION_CONDITION {
        return Err(Error::SingularInnovation(condition));
    }
    let chol = info.cholesky().ok_or(Error::SingularInnovation(f64::INFINITY))?;
    let info_inv = chol.inverse();

    let delta = &l * (&info_inv * (weighted.transpose() * innov));
    let covariance = clamp_covariance(&(&l * info_inv * l.transpose()), COVARIANCE_FLOOR);
    Ok(Correction {
        delta,
        covariance,
        condition,
    })
}
