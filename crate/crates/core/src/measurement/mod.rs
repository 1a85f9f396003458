//! LiDAR measurement pipeline: de-skew, map lookup, plane fit and
//! point-to-plane rows.

mod associate;
pub mod deskew;
pub mod kdtree;
pub mod map;
pub mod plane;
pub mod row;

pub use associate::{associate, AssociationConfig};
pub use deskew::{deskew, PoseTrack, Scan, ScanPoint};
pub use kdtree::{KdTree, Neighbor};
pub use map::{MapConfig, MapIndex};
pub use plane::{fit_plane, PlaneConfig, PlaneFit};
pub use row::{build_ekf_row, build_row, Row21, Row24, residual, world_point, ExtrinsicRowForm, PlaneObservation};
