//! Attaching object sequences to a target vehicle.
//!
//! Per object frame: choose anchors on the target's top rectangle, place
//! the object there, apply the spray rotation, drop points off the beam
//! grid, merge with the scene and re-render through the laser model.

mod anchor;
mod config;
mod gate;
mod pipeline;
mod place;

pub use anchor::{facing_faces, select_anchor, Anchor, AnchorSet, Face, FacingFace};
pub use config::{check_angle, check_density, DatasetProfile, FusionConfig, FusionMode, MAX_DENSITY, MAX_SPRAY_ANGLE_DEG};
pub use gate::{density_gate, GateProfile};
pub use pipeline::{
    anchors_for, fuse, fuse_prepared, prepare_copies, render, render_scene, FusedFrame, PointOrigin, PreparedCopy,
};
pub use place::{half_height, place_object, placement_transform, principal_yaw, rotate_spray};
