use nalgebra::Vector3;

use crate::cloud::{BoundingBox3D, Point, PointCloud};
use crate::error::{Error, Result};
use crate::par;
use crate::rangesim::{backproject_with_sources, project, LaserModel};

use super::anchor::{select_anchor, AnchorSet};
use super::config::FusionConfig;
use super::gate::GateProfile;
use super::place::{place_object, rotate_spray};

/// Where a fused point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointOrigin {
    /// Index into the input scene.
    Scene(usize),
    /// Index into the gated object copy attached at anchor `copy`.
    Object { copy: usize, index: usize },
}

impl PointOrigin {
    pub fn is_scene(&self) -> bool {
        matches!(self, PointOrigin::Scene(_))
    }
}

/// One re-rendered scene with per-point provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedFrame {
    pub frame_index: usize,
    /// Back-projected cloud; the ring channel holds the image row.
    pub cloud: PointCloud,
    pub origins: Vec<PointOrigin>,
    /// Object points after placement, before the density gate.
    pub placed_points: usize,
    /// Object points that passed the density gate.
    pub gated_points: usize,
}

impl FusedFrame {
    /// Surviving points that came from the scene.
    pub fn scene_points(&self) -> PointCloud {
        let keep: Vec<usize> = (0..self.origins.len()).filter(|&i| self.origins[i].is_scene()).collect();
        self.cloud.select(&keep)
    }

    /// Surviving points that came from an object copy.
    pub fn object_point_count(&self) -> usize {
        self.origins.iter().filter(|o| !o.is_scene()).count()
    }
}

/// An object copy after placement and spray rotation, with its gate profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCopy {
    pub cloud: PointCloud,
    pub profile: GateProfile,
}

impl PreparedCopy {
    pub fn gated(&self, d_h: f64, d_v: f64) -> PointCloud {
        self.cloud.select(&self.profile.retained(d_h, d_v))
    }
}

/// Anchors for `target` as seen from the sensor origin.
pub fn anchors_for(target: &BoundingBox3D, cfg: &FusionConfig) -> Result<AnchorSet> {
    select_anchor(target, &Vector3::zeros(), cfg.mode)
}

/// Places one copy of `object` per anchor and applies the spray rotation.
pub fn prepare_copies(
    object: &PointCloud,
    anchors: &AnchorSet,
    spray_angle_deg: f64,
    model: &LaserModel,
) -> Result<Vec<PreparedCopy>> {
    if object.is_empty() {
        return Ok(Vec::new());
    }
    anchors
        .anchors
        .iter()
        .map(|a| {
            let placed = place_object(object, &a.point, a.tangent_yaw)?;
            let cloud = rotate_spray(&placed, spray_angle_deg)?.without_rings();
            let profile = GateProfile::new(&cloud, model);
            Ok(PreparedCopy { cloud, profile })
        })
        .collect()
}

/// Merges the scene with the object copies (scene first), projects the
/// result and back-projects it.
pub fn render(scene: &PointCloud, copies: &[PointCloud], model: &LaserModel) -> Result<FusedFrame> {
    let total = scene.len() + copies.iter().map(PointCloud::len).sum::<usize>();
    let mut points: Vec<Point> = Vec::with_capacity(total);
    let mut origins = Vec::with_capacity(total);
    points.extend_from_slice(scene.points());
    origins.extend((0..scene.len()).map(PointOrigin::Scene));
    for (copy, c) in copies.iter().enumerate() {
        points.extend_from_slice(c.points());
        origins.extend((0..c.len()).map(|index| PointOrigin::Object { copy, index }));
    }
    let gated: usize = copies.iter().map(PointCloud::len).sum();
    let merged = PointCloud::new(scene.frame_id(), points)?;
    let back = backproject_with_sources(&project(&merged, model)?)?;
    Ok(FusedFrame {
        frame_index: 0,
        cloud: back.cloud.with_frame_id(scene.frame_id()),
        origins: back.sources.iter().map(|&s| origins[s]).collect(),
        placed_points: gated,
        gated_points: gated,
    })
}

/// The scene alone, re-rendered through the model.
pub fn render_scene(scene: &PointCloud, model: &LaserModel) -> Result<FusedFrame> {
    render(scene, &[], model)
}

/// Fuses every object frame into the scene: anchor, place, rotate, gate,
/// merge and re-render. Returns one fused frame per object frame.
pub fn fuse(
    scene: &PointCloud,
    target: &BoundingBox3D,
    object_frames: &[PointCloud],
    cfg: &FusionConfig,
    model: &LaserModel,
) -> Result<Vec<FusedFrame>> {
    cfg.validate()?;
    if object_frames.is_empty() {
        return Err(Error::InvalidGenerator("no object frames".into()));
    }
    let anchors = anchors_for(target, cfg)?;
    let indexed: Vec<(usize, &PointCloud)> = object_frames.iter().enumerate().collect();
    par::try_map(&indexed, |&(k, object)| {
        let copies = prepare_copies(object, &anchors, cfg.spray_angle_deg, model)?;
        fuse_prepared(scene, &copies, cfg.d_h, cfg.d_v, model).map(|mut f| {
            f.frame_index = k;
            f
        })
    })
}

/// Gates prepared copies and renders them into the scene.
pub fn fuse_prepared(
    scene: &PointCloud,
    copies: &[PreparedCopy],
    d_h: f64,
    d_v: f64,
    model: &LaserModel,
) -> Result<FusedFrame> {
    let gated: Vec<PointCloud> = copies.iter().map(|c| c.gated(d_h, d_v)).collect();
    let mut frame = render(scene, &gated, model)?;
    frame.placed_points = copies.iter().map(|c| c.cloud.len()).sum();
    Ok(frame)
}
