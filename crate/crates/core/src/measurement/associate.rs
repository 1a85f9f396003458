use nalgebra::Vector3;
use rayon::prelude::*;

use super::map::MapIndex;
use super::plane::{fit_plane, PlaneConfig};
use super::row::{world_point, PlaneObservation};
use crate::error::Result;
use crate::symmetry::SystemState;

#[derive(Clone, Debug)]
pub struct AssociationConfig {
    /// Neighbours per plane fit.
    pub neighbors: usize,
    /// Farthest neighbour allowed for a usable match (m).
    pub max_neighbor_distance: f64,
    pub plane: PlaneConfig,
    /// Residuals larger than this are dropped (m).
    pub gate: f64,
    /// Range noise of the sensor (m, one sigma).
    pub lidar_sigma: f64,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        Self {
            neighbors: 5,
            max_neighbor_distance: 1.0,
            plane: PlaneConfig::default(),
            gate: 1.0,
            lidar_sigma: 0.01,
        }
    }
}

/// Matches de-skewed LiDAR-frame points to local planes of the map at the
/// state `xi`. Output order follows input order.
pub fn associate(
    map: &MapIndex,
    xi: &SystemState,
    points: &[Vector3<f64>],
    config: &AssociationConfig,
) -> Result<Vec<PlaneObservation>> {
    let viewpoint = world_point(xi, &Vector3::zeros());
    let max_d2 = config.max_neighbor_distance * config.max_neighbor_distance;
    let matches: Vec<Option<PlaneObservation>> = points
        .par_iter()
        .map(|p| {
            let pw = world_point(xi, p);
            let neighbors = map.knn(&pw, config.neighbors)?;
            if neighbors.last().is_none_or(|n| n.dist2 > max_d2) {
                return Ok(None);
            }
            let support: Vec<_> = neighbors.iter().map(|n| map.points()[n.index]).collect();
            let plane = match fit_plane(&support, &viewpoint, &config.plane) {
                Ok(plane) if plane.valid => plane,
                _ => return Ok(None),
            };
            if plane.signed_distance(&pw).abs() > config.gate {
                return Ok(None);
            }
            Ok(Some(PlaneObservation {
                point: *p,
                plane,
                variance: config.lidar_sigma.powi(2) + plane.rms.powi(2),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(matches.into_iter().flatten().collect())
}
