//! Planar environments and a grid LiDAR ray caster.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Bounded rectangle `{c + s u + t v : s, t ∈ [0, 1]}` with `u ⟂ v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub corner: Vector3<f64>,
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
    pub normal: Vector3<f64>,
}

impl Rect {
    /// Panics if the edges are degenerate or not orthogonal.
    pub fn new(corner: Vector3<f64>, u: Vector3<f64>, v: Vector3<f64>) -> Self {
        assert!(u.norm() > 0.0 && v.norm() > 0.0, "degenerate rectangle");
        assert!(u.dot(&v).abs() < 1e-9 * u.norm() * v.norm(), "edges must be orthogonal");
        Self {
            corner,
            u,
            v,
            normal: u.cross(&v).normalize(),
        }
    }

    /// Ray parameter of the first intersection with `o + s d`, if any.
    pub fn intersect(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let denom = self.normal.dot(dir);
        if denom.abs() < 1e-12 {
            return None;
        }
        let s = self.normal.dot(&(self.corner - origin)) / denom;
        if s <= 0.0 {
            return None;
        }
        let rel = origin + dir * s - self.corner;
        let a = rel.dot(&self.u) / self.u.norm_squared();
        let b = rel.dot(&self.v) / self.v.norm_squared();
        ((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)).then_some(s)
    }

    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        let rel = p - self.corner;
        let a = (rel.dot(&self.u) / self.u.norm_squared()).clamp(0.0, 1.0);
        let b = (rel.dot(&self.v) / self.v.norm_squared()).clamp(0.0, 1.0);
        (rel - self.u * a - self.v * b).norm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSpec {
    /// Room extent along x, y, z (m); the floor is at z = 0 and the room is
    /// centred on the origin horizontally.
    pub size: [f64; 3],
    /// Add interior boxes that break the room's symmetries.
    pub clutter: bool,
}

impl Default for WorldSpec {
    fn default() -> Self {
        Self {
            size: [24.0, 18.0, 6.0],
            clutter: true,
        }
    }
}

/// A set of rectangles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanarWorld {
    pub rects: Vec<Rect>,
}

impl PlanarWorld {
    /// Six faces of an axis-aligned box with outward normals.
    pub fn add_box(&mut self, min: Vector3<f64>, size: Vector3<f64>) {
        let (ex, ey, ez) = (
            Vector3::x() * size.x,
            Vector3::y() * size.y,
            Vector3::z() * size.z,
        );
        let max = min + size;
        self.rects.extend([
            Rect::new(min, ey, ex),
            Rect::new(max, -ex, -ey),
            Rect::new(min, ex, ez),
            Rect::new(max, -ez, -ex),
            Rect::new(min, ez, ey),
            Rect::new(max, -ey, -ez),
        ]);
    }

    pub fn from_spec(spec: &WorldSpec) -> Self {
        let [sx, sy, sz] = spec.size;
        let mut world = PlanarWorld::default();
        world.add_box(Vector3::new(-sx / 2.0, -sy / 2.0, 0.0), Vector3::new(sx, sy, sz));
        if spec.clutter {
            let boxes = [
                ([6.0, 4.0, 0.0], [1.0, 1.5, 2.5]),
                ([-7.0, -5.0, 0.0], [2.0, 1.0, 1.2]),
                ([-6.5, 5.0, 0.0], [0.8, 0.8, 4.0]),
                ([5.0, -5.5, 0.0], [1.5, 2.5, 0.8]),
                ([-1.0, 7.0, 3.5], [3.0, 1.0, 1.0]),
            ];
            for (min, size) in boxes {
                world.add_box(Vector3::from(min), Vector3::from(size));
            }
            // A sloped panel leaning on the far wall.
            let corner = Vector3::new(sx / 2.0 - 2.0, -2.0, 0.0);
            world.rects.push(Rect::new(
                corner,
                Vector3::new(0.0, 4.0, 0.0),
                Vector3::new(1.5, 0.0, 2.0),
            ));
        }
        world
    }

    /// Nearest hit within `(min_range, max_range]` along a unit direction.
    pub fn cast(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, min_range: f64, max_range: f64) -> Option<f64> {
        self.rects
            .iter()
            .filter_map(|r| r.intersect(origin, dir))
            .filter(|&s| s > min_range && s <= max_range)
            .min_by(f64::total_cmp)
    }

    /// Distance from `p` to the closest rectangle.
    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        self.rects.iter().map(|r| r.distance(p)).fold(f64::INFINITY, f64::min)
    }
}

/// Grid scanner: `azimuth_steps × elevation_steps` beams over the field of view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarSpec {
    pub azimuth_steps: usize,
    pub elevation_steps: usize,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub min_range: f64,
    pub max_range: f64,
}

impl Default for LidarSpec {
    fn default() -> Self {
        Self {
            azimuth_steps: 180,
            elevation_steps: 32,
            elevation_min_deg: -30.0,
            elevation_max_deg: 30.0,
            min_range: 0.3,
            max_range: 50.0,
        }
    }
}

impl LidarSpec {
    /// Unit beam directions in the LiDAR frame, azimuth-major so that the
    /// sweep time grows with azimuth.
    pub fn directions(&self) -> Vec<Vector3<f64>> {
        let mut out = Vec::with_capacity(self.azimuth_steps * self.elevation_steps);
        for i in 0..self.azimuth_steps {
            let az = 2.0 * std::f64::consts::PI * i as f64 / self.azimuth_steps as f64;
            for j in 0..self.elevation_steps {
                let frac = if self.elevation_steps > 1 {
                    j as f64 / (self.elevation_steps - 1) as f64
                } else {
                    0.5
                };
                let el = (self.elevation_min_deg
                    + frac * (self.elevation_max_deg - self.elevation_min_deg))
                    .to_radians();
                out.push(Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_ahead() {
        let mut world = PlanarWorld::default();
        world.rects.push(Rect::new(
            Vector3::new(-10.0, -10.0, 5.0),
            Vector3::new(20.0, 0.0, 0.0),
            Vector3::new(0.0, 20.0, 0.0),
        ));
        let hit = world.cast(&Vector3::zeros(), &Vector3::z(), 0.1, 50.0);
        assert_eq!(hit, Some(5.0));
        let parallel = world.cast(&Vector3::zeros(), &Vector3::x(), 0.1, 50.0);
        assert_eq!(parallel, None);
    }

    #[test]
    fn box_faces_point_outward() {
        let mut world = PlanarWorld::default();
        world.add_box(Vector3::zeros(), Vector3::new(1.0, 2.0, 3.0));
        let centre = Vector3::new(0.5, 1.0, 1.5);
        for r in &world.rects {
            assert!(r.normal.dot(&(r.corner - centre)) > 0.0);
        }
    }

    #[test]
    fn room_encloses_the_origin() {
        let world = PlanarWorld::from_spec(&WorldSpec::default());
        let o = Vector3::new(0.0, 0.0, 1.5);
        for d in LidarSpec::default().directions() {
            assert!(world.cast(&o, &d, 0.1, 50.0).is_some());
        }
    }
}
