use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;

use crate::cloud::BoundingBox3D;
use crate::error::{Error, Result};

use super::config::FusionMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Front,
    Rear,
    Left,
    Right,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Front, Face::Rear, Face::Left, Face::Right];

    pub fn is_head_tail(&self) -> bool {
        matches!(self, Face::Front | Face::Rear)
    }

    /// Outward normal in box-local coordinates.
    fn local_normal(&self) -> Vector3<f64> {
        match self {
            Face::Front => Vector3::x(),
            Face::Rear => -Vector3::x(),
            Face::Left => Vector3::y(),
            Face::Right => -Vector3::y(),
        }
    }

    fn half_depth(&self, b: &BoundingBox3D) -> f64 {
        if self.is_head_tail() { 0.5 * b.length() } else { 0.5 * b.width() }
    }

    pub fn outward_normal(&self, b: &BoundingBox3D) -> Vector3<f64> {
        b.to_scene(&self.local_normal()) - b.center()
    }

    pub fn center(&self, b: &BoundingBox3D) -> Vector3<f64> {
        b.to_scene(&(self.local_normal() * self.half_depth(b)))
    }

    /// Midpoint of the face's top edge.
    pub fn top_midpoint(&self, b: &BoundingBox3D) -> Vector3<f64> {
        self.center(b) + Vector3::new(0.0, 0.0, 0.5 * b.height())
    }

    /// Heading of the face's horizontal tangent direction.
    pub fn tangent_yaw(&self, b: &BoundingBox3D) -> f64 {
        if self.is_head_tail() { b.yaw() + FRAC_PI_2 } else { b.yaw() }
    }
}

/// A face visible from the sensor with its normal/line-of-sight cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacingFace {
    pub face: Face,
    pub cosine: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    /// Attachment point B on the top rectangle of the box.
    pub point: Vector3<f64>,
    /// Yaw the object's principal horizontal axis is aligned to.
    pub tangent_yaw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub anchors: Vec<Anchor>,
    /// Faces toward the sensor, most direct first.
    pub facing: Vec<FacingFace>,
}

/// Faces whose outward horizontal normal has a positive dot product with the
/// unit vector from the face center to the sensor. Sorted by decreasing
/// cosine; exact ties put front/rear first.
pub fn facing_faces(b: &BoundingBox3D, sensor: &Vector3<f64>) -> Result<Vec<FacingFace>> {
    if b.contains(sensor, 0.0) {
        return Err(Error::SensorInsideBox);
    }
    let mut faces: Vec<FacingFace> = Face::ALL
        .iter()
        .filter_map(|&face| {
            let to_sensor = sensor - face.center(b);
            let norm = to_sensor.norm();
            let cosine = if norm > 0.0 { face.outward_normal(b).dot(&to_sensor) / norm } else { 0.0 };
            (cosine > 0.0).then_some(FacingFace { face, cosine })
        })
        .collect();
    faces.sort_by(|a, c| {
        c.cosine
            .total_cmp(&a.cosine)
            .then(c.face.is_head_tail().cmp(&a.face.is_head_tail()))
    });
    Ok(faces)
}

fn corner(b: &BoundingBox3D, faces: &[FacingFace]) -> Vector3<f64> {
    let mut local = Vector3::new(0.0, 0.0, 0.5 * b.height());
    for f in faces {
        match f.face {
            Face::Front => local.x = 0.5 * b.length(),
            Face::Rear => local.x = -0.5 * b.length(),
            Face::Left => local.y = 0.5 * b.width(),
            Face::Right => local.y = -0.5 * b.width(),
        }
    }
    b.to_scene(&local)
}

fn anchor_for(b: &BoundingBox3D, face: Face) -> Anchor {
    Anchor {
        point: face.top_midpoint(b),
        tangent_yaw: face.tangent_yaw(b),
    }
}

/// Picks attachment points on the box's top rectangle for `mode`.
pub fn select_anchor(b: &BoundingBox3D, sensor: &Vector3<f64>, mode: FusionMode) -> Result<AnchorSet> {
    let facing = facing_faces(b, sensor)?;
    let infeasible = |reason: String| Error::InfeasibleMode {
        mode: mode.as_str(),
        reason,
    };
    let anchors = match mode {
        FusionMode::HeadTailSide | FusionMode::BodySide => {
            let want_head_tail = mode == FusionMode::HeadTailSide;
            let face = facing
                .iter()
                .find(|f| f.face.is_head_tail() == want_head_tail)
                .ok_or_else(|| {
                    infeasible(format!(
                        "no {} face toward the sensor",
                        if want_head_tail { "front/rear" } else { "lateral" }
                    ))
                })?;
            vec![anchor_for(b, face.face)]
        }
        FusionMode::TwoSides | FusionMode::CornerPoint => {
            if facing.len() != 2 {
                return Err(infeasible(format!(
                    "needs two faces toward the sensor, found {}",
                    facing.len()
                )));
            }
            if mode == FusionMode::TwoSides {
                facing.iter().map(|f| anchor_for(b, f.face)).collect()
            } else {
                vec![Anchor {
                    point: corner(b, &facing),
                    tangent_yaw: facing[0].face.tangent_yaw(b),
                }]
            }
        }
    };
    Ok(AnchorSet { anchors, facing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn car(center: [f64; 3], yaw: f64) -> BoundingBox3D {
        BoundingBox3D::new(center, [4.0, 1.8, 1.5], yaw, "Car").unwrap()
    }

    fn origin() -> Vector3<f64> {
        Vector3::zeros()
    }

    #[test]
    fn head_on_rear_face() {
        let b = car([10.0, 0.0, 0.0], 0.0);
        let set = select_anchor(&b, &origin(), FusionMode::HeadTailSide).unwrap();
        assert_eq!(set.facing.len(), 1);
        assert_eq!(set.facing[0].face, Face::Rear);
        let a = set.anchors[0].point;
        assert!((a - Vector3::new(8.0, 0.0, 0.75)).norm() < 1e-12);
        assert!(select_anchor(&b, &origin(), FusionMode::BodySide).is_err());
        assert!(select_anchor(&b, &origin(), FusionMode::TwoSides).is_err());
        assert!(select_anchor(&b, &origin(), FusionMode::CornerPoint).is_err());
    }

    #[test]
    fn side_on_body_face() {
        let b = car([0.0, 10.0, 0.0], 0.0);
        let set = select_anchor(&b, &origin(), FusionMode::BodySide).unwrap();
        assert_eq!(set.facing.iter().map(|f| f.face).collect::<Vec<_>>(), vec![Face::Right]);
        assert!(matches!(
            select_anchor(&b, &origin(), FusionMode::HeadTailSide),
            Err(Error::InfeasibleMode { .. })
        ));
    }

    #[test]
    fn yawed_box_two_faces_and_corner() {
        let b = car([10.0, 0.0, 0.0], FRAC_PI_4);
        let faces = facing_faces(&b, &origin()).unwrap();
        assert_eq!(faces.len(), 2);
        let set = select_anchor(&b, &origin(), FusionMode::CornerPoint).unwrap();
        let c = set.anchors[0].point;
        // Shared corner of the rear and left faces.
        let expect = b.to_scene(&Vector3::new(-2.0, 0.9, 0.75));
        assert!((c - expect).norm() < 1e-12);
        assert_eq!(select_anchor(&b, &origin(), FusionMode::TwoSides).unwrap().anchors.len(), 2);
        for mode in FusionMode::ALL {
            assert!(select_anchor(&b, &origin(), mode).is_ok(), "{mode}");
        }
    }

    #[test]
    fn sensor_inside_box_rejected() {
        let b = car([0.0, 0.0, 0.0], 0.3);
        assert!(matches!(facing_faces(&b, &origin()), Err(Error::SensorInsideBox)));
    }

    #[test]
    fn facing_is_scale_invariant() {
        for k in 0..50 {
            let yaw = -3.0 + 0.12 * k as f64;
            let b = car([12.0, 3.0 + 0.1 * k as f64, -0.8], yaw);
            let base: Vec<Face> = facing_faces(&b, &origin()).unwrap().iter().map(|f| f.face).collect();
            for s in [0.5, 3.0, 17.0] {
                let c = b.center() * s;
                let scaled = BoundingBox3D::new([c.x, c.y, c.z], (b.dims() * s).into(), yaw, "Car").unwrap();
                let faces: Vec<Face> = facing_faces(&scaled, &origin()).unwrap().iter().map(|f| f.face).collect();
                assert_eq!(faces, base);
            }
        }
    }

    #[test]
    fn anchors_lie_on_top_rectangle() {
        for k in 0..40 {
            let yaw = -3.1 + 0.155 * k as f64;
            let b = car([8.0, -4.0 + 0.2 * k as f64, -0.9], yaw);
            for mode in FusionMode::ALL {
                let Ok(set) = select_anchor(&b, &origin(), mode) else { continue };
                for a in set.anchors {
                    let l = b.to_local(&a.point);
                    assert!((l.z - 0.75).abs() < 1e-9);
                    let on_x_edge = (l.x.abs() - 2.0).abs() < 1e-9 && l.y.abs() <= 0.9 + 1e-9;
                    let on_y_edge = (l.y.abs() - 0.9).abs() < 1e-9 && l.x.abs() <= 2.0 + 1e-9;
                    assert!(on_x_edge || on_y_edge);
                }
            }
        }
    }
}
