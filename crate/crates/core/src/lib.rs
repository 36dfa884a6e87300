//! Random-object point-cloud fusion for LiDAR scenes.
//!
//! The crate attaches simulated water-mist or smoke point clouds to a target
//! vehicle, re-renders the merged scene through a range-image LiDAR model so
//! that occlusion is physically consistent, and scores how much the
//! perturbation degrades 3D vehicle detection.
//!
//! Module map:
//!
//! - [`cloud`], [`distance`], [`io`]: point and box geometry, point-set
//!   distances, KITTI-style file formats.
//! - [`rangesim`]: laser model, spherical projection with a z-buffer,
//!   back-projection, scan unfolding and per-ring model fitting.
//! - [`objectgen`]: K-frame object sequences, either generated procedurally
//!   or loaded from recordings.
//! - [`fusion`]: anchor selection, placement, spray rotation, density gating
//!   and the full fusion pipeline.
//! - [`eval`]: 3D IoU, attack success rate, occlusion ratio and parameter
//!   sweeps.
//! - [`synth`]: ray-cast scene generator used by fixtures, examples and
//!   benchmarks.
//!
//! With the default `parallel` feature, per-frame and per-cell work runs on
//! rayon's global pool. Without it every loop runs sequentially and produces
//! bit-identical output.

pub mod cloud;
pub mod distance;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod objectgen;
pub mod rangesim;
pub mod synth;

mod par;

pub use cloud::{BoundingBox3D, Point, PointCloud, RigidTransform};
pub use error::{Error, Result};
