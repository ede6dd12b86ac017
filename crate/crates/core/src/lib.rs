//! Globally optimal 4DOF registration of levelled point-cloud scan pairs.
//!
//! The solver takes candidate correspondences between two scans whose
//! vertical axes are already aligned (the usual situation for tilt-compensated
//! terrestrial LiDAR) and finds the rotation about the vertical axis plus 3D
//! translation that aligns the most correspondences within a threshold.
//!
//! Two stages:
//!
//! - [`fmp`] prunes correspondences that provably cannot belong to any
//!   optimal consensus set.
//! - [`bnb`] runs best-first branch-and-bound over the translation, solving
//!   the rotation exactly at every node by interval stabbing ([`rotation`]).
//!
//! [`ransac`] provides a randomized baseline, [`synth`] controlled test data
//! and oracles, and [`io`] / [`pipeline`] the file formats and the
//! end-to-end driver used by the `reg4dof` binary.

pub mod bnb;
pub mod error;
pub mod fmp;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod ransac;
pub mod rotation;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{
    apply_pose, objective, residual, rotate_z, Correspondence, InlierConfig, MatchSet, Point3,
    Pose4DOF,
};
