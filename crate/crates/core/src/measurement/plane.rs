use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneConfig {
    /// Maximum distance of any support point from the fitted plane (m).
    pub max_point_distance: f64,
    /// Maximum RMS of the support-point distances (m).
    pub max_rms: f64,
    /// Minimum ratio of the narrow to the wide in-plane extent of the support.
    /// Nearly collinear support leaves the normal free.
    pub min_aspect: f64,
}

impl Default for PlaneConfig {
    fn default() -> Self {
        Self {
            max_point_distance: 0.1,
            max_rms: 0.05,
            min_aspect: 0.0,
        }
    }
}

/// Least-squares plane `{p : nᵀ(p − q) = 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneFit {
    pub normal: Vector3<f64>,
    pub point: Vector3<f64>,
    pub rms: f64,
    pub valid: bool,
}

impl PlaneFit {
    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        self.normal.dot(&(p - self.point))
    }
}

/// Fits a plane through the support points via the covariance eigen-decomposition.
///
/// The normal is the eigenvector of the smallest eigenvalue, oriented towards
/// `viewpoint`; the anchor point is the centroid.
pub fn fit_plane(
    points: &[Vector3<f64>],
    viewpoint: &Vector3<f64>,
    config: &PlaneConfig,
) -> Result<PlaneFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateCloud);
    }
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vector3<f64>>() / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = cov.symmetric_eigen();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    if eig.eigenvalues[idx[1]] - eig.eigenvalues[idx[0]] < 1e-12 {
        return Err(Error::DegenerateCloud);
    }
    let mut normal: Vector3<f64> = eig.eigenvectors.column(idx[0]).into();
    normal.normalize_mut();
    if normal.dot(&(viewpoint - centroid)) < 0.0 {
        normal = -normal;
    }
    let dists: Vec<f64> = points.iter().map(|p| normal.dot(&(p - centroid))).collect();
    let rms = (dists.iter().map(|d| d * d).sum::<f64>() / n).sqrt();
    let max = dists.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let aspect = (eig.eigenvalues[idx[1]].max(0.0) / eig.eigenvalues[idx[2]]).sqrt();
    Ok(PlaneFit {
        normal,
        point: centroid,
        rms,
        valid: max < config.max_point_distance && rms < config.max_rms && aspect >= config.min_aspect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_plane() {
        let pts = [
            Vector3::new(0.0, 0.0, 2.0),
            Vector3::new(1.0, 0.0, 2.0),
            Vector3::new(0.0, 1.0, 2.0),
            Vector3::new(1.0, 1.0, 2.0),
            Vector3::new(0.5, 0.3, 2.0),
        ];
        let fit = fit_plane(&pts, &Vector3::zeros(), &PlaneConfig::default()).unwrap();
        assert!((fit.normal - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        assert!((fit.point.z - 2.0).abs() < 1e-12);
        assert!(fit.rms < 1e-12);
        assert!(fit.valid);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<_> = (0..5).map(|i| Vector3::new(i as f64, 2.0 * i as f64, 1.0)).collect();
        assert!(matches!(
            fit_plane(&pts, &Vector3::zeros(), &PlaneConfig::default()),
            Err(Error::DegenerateCloud)
        ));
    }

    #[test]
    fn thin_support_fails_aspect_check() {
        // A gently curved strip: planar enough to fit, too narrow to trust.
        let pts: Vec<_> = (0..5)
            .map(|i| {
                let x = i as f64 * 0.3;
                Vector3::new(x, 0.01 * x * x, 2.0)
            })
            .collect();
        let loose = fit_plane(&pts, &Vector3::zeros(), &PlaneConfig::default()).unwrap();
        assert!(loose.valid);
        let strict = PlaneConfig {
            min_aspect: 0.2,
            ..Default::default()
        };
        assert!(!fit_plane(&pts, &Vector3::zeros(), &strict).unwrap().valid);
    }

    #[test]
    fn noisy_plane_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let truth = Vector3::new(0.2, -0.3, 1.0).normalize();
        let u = truth.cross(&Vector3::x()).normalize();
        let v = truth.cross(&u);
        let mut worst_angle = 0.0f64;
        for _ in 0..100 {
            // Square patch of 2 m with jittered support points.
            let layout = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0), (0.0, 0.0)];
            let pts: Vec<_> = layout
                .iter()
                .map(|&(a, b): &(f64, f64)| {
                    let a = a + rng.random_range(-0.2..0.2);
                    let b = b + rng.random_range(-0.2..0.2);
                    u * a + v * b + truth * noise.sample(&mut rng)
                })
                .collect();
            let fit = fit_plane(&pts, &(truth * 5.0), &PlaneConfig::default()).unwrap();
            assert!(fit.rms < 0.02);
            worst_angle = worst_angle.max(fit.normal.dot(&truth).clamp(-1.0, 1.0).acos());
        }
        assert!(worst_angle.to_degrees() < 2.0, "{}", worst_angle.to_degrees());
    }

    #[test]
    fn far_outlier_invalidates() {
        let mut pts: Vec<_> = (0..4)
            .map(|i| Vector3::new((i % 2) as f64, (i / 2) as f64, 0.0))
            .collect();
        pts.push(Vector3::new(0.5, 0.5, 0.5));
        let fit = fit_plane(&pts, &Vector3::z(), &PlaneConfig::default()).unwrap();
        assert!(!fit.valid);
    }
}
