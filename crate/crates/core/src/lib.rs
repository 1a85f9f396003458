//! Equivariant filtering for tightly coupled LiDAR-inertial odometry.
//!
//! The crate is organised bottom-up:
//!
//! * [`lie`]: SO(3), SE(3) and SE₂(3) primitives.
//! * [`symmetry`]: the symmetry group, its actions and the equivariant lift.
//! * [`eqf`]: the equivariant filter, its linearizations, S² gravity
//!   utilities and an error-state EKF baseline.
//! * [`measurement`]: de-skew, k-d tree map and point-to-plane rows.
//! * [`sim`]: synthetic trajectories, IMU samples and ray-cast scans.
//! * [`harness`]: dataset files, filter runs, metrics and verification suites.
//!
//! The `eqlio` binary exposes the harness on the command line; the
//! `examples/` directory walks through each layer.

pub mod eqf;
pub mod error;
pub mod harness;
pub mod lie;
pub mod measurement;
pub mod samples;
pub mod sim;
pub mod symmetry;

pub use error::{Error, Result};
