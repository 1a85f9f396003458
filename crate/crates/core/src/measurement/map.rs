use std::collections::HashSet;

use nalgebra::Vector3;

use super::kdtree::{offer, KdTree, Neighbor};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MapConfig {
    /// Edge of the occupancy voxels used for down-sampling; `<= 0` disables it.
    pub voxel_size: f64,
    /// Pending (unindexed) points, as a fraction of the tree size, that trigger a rebuild.
    pub rebuild_ratio: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            voxel_size: 0.5,
            rebuild_ratio: 0.2,
        }
    }
}

/// World-frame point map: a k-d tree over the indexed prefix plus a small
/// tree over recent insertions, rebuilt on every insert.
#[derive(Clone, Debug, Default)]
pub struct MapIndex {
    points: Vec<Vector3<f64>>,
    tree: KdTree,
    tail: KdTree,
    occupied: HashSet<[i64; 3]>,
    config: MapConfig,
    rebuilds: usize,
}

impl MapIndex {
    pub fn new(config: MapConfig) -> Self {
        Self {
            config,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    /// Number of points covered by the k-d tree.
    pub fn indexed(&self) -> usize {
        self.tree.len()
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    fn voxel(&self, p: &Vector3<f64>) -> [i64; 3] {
        let s = self.config.voxel_size;
        [
            (p.x / s).floor() as i64,
            (p.y / s).floor() as i64,
            (p.z / s).floor() as i64,
        ]
    }

    /// Appends points whose voxel is still empty; returns how many were kept.
    pub fn insert(&mut self, world_points: &[Vector3<f64>]) -> Result<usize> {
        let mut kept = 0;
        for p in world_points {
            if !p.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFiniteInput("map point"));
            }
            if self.config.voxel_size > 0.0 && !self.occupied.insert(self.voxel(p)) {
                continue;
            }
            self.points.push(*p);
            kept += 1;
        }
        let pending = self.points.len() - self.tree.len();
        if pending > 0 && pending as f64 > self.config.rebuild_ratio * self.tree.len() as f64 {
            self.tree = KdTree::build(&self.points);
            self.rebuilds += 1;
        }
        if self.tail.len() != self.points.len() - self.tree.len() {
            self.tail = KdTree::build(&self.points[self.tree.len()..]);
        }
        Ok(kept)
    }

    /// Exact `k` nearest map points, ties broken by insertion order.
    pub fn knn(&self, query: &Vector3<f64>, k: usize) -> Result<Vec<Neighbor>> {
        if self.points.len() < k {
            return Err(Error::InsufficientMap {
                have: self.points.len(),
                need: k,
            });
        }
        let mut best = self.tree.knn(&self.points, query, k);
        let base = self.tree.len();
        for n in self.tail.knn(&self.points[base..], query, k) {
            offer(&mut best, Neighbor { index: n.index + base, ..n }, k);
        }
        Ok(best)
    }
}
