//! Core geometry: points, clouds, oriented boxes and rigid transforms.
//!
//! Coordinates are meters in the sensor frame: x forward, y left, z up.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Unitless reflectance in `[0, 1]`.
    pub intensity: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, z: f64, intensity: f64) -> Self {
        Self { x, y, z, intensity }
    }

    pub const fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self::new(x, y, z, 0.0)
    }

    pub fn range(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Horizontal distance from the sensor's vertical axis.
    pub fn range_xy(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance_squared(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn coords(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn with_coords(&self, v: Vector3<f64>) -> Point {
        Point::new(v.x, v.y, v.z, self.intensity)
    }

    fn check(&self) -> std::result::Result<(), &'static str> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err("non-finite coordinate");
        }
        if !(0.0..=1.0).contains(&self.intensity) {
            return Err("intensity outside [0, 1]");
        }
        Ok(())
    }
}

/// An ordered point collection, optionally tagged with per-point laser rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point>,
    frame_id: String,
    ring: Option<Vec<u16>>,
}

impl PointCloud {
    /// Validates coordinates and intensities.
    pub fn new(frame_id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        for (index, p) in points.iter().enumerate() {
            p.check()
                .map_err(|reason| Error::InvalidPoint { index, reason })?;
        }
        Ok(Self {
            points,
            frame_id: frame_id.into(),
            ring: None,
        })
    }

    /// Builds a cloud from points already known to be valid.
    pub(crate) fn from_parts(
        frame_id: impl Into<String>,
        points: Vec<Point>,
        ring: Option<Vec<u16>>,
    ) -> Self {
        debug_assert!(ring.as_ref().is_none_or(|r| r.len() == points.len()));
        Self {
            points,
            frame_id: frame_id.into(),
            ring,
        }
    }

    pub fn empty(frame_id: impl Into<String>) -> Self {
        Self::from_parts(frame_id, Vec::new(), None)
    }

    /// Attaches a ring channel; its length must match the point count.
    pub fn with_rings(mut self, ring: Vec<u16>) -> Result<Self> {
        if ring.len() != self.points.len() {
            return Err(Error::InvalidPoint {
                index: ring.len().min(self.points.len()),
                reason: "ring channel length differs from point count",
            });
        }
        self.ring = Some(ring);
        Ok(self)
    }

    pub fn without_rings(mut self) -> Self {
        self.ring = None;
        self
    }

    pub fn with_frame_id(mut self, frame_id: impl Into<String>) -> Self {
        self.frame_id = frame_id.into();
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn frame_id(&self) -> &str {
        &self.frame_id
    }

    pub fn rings(&self) -> Option<&[u16]> {
        self.ring.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Vector3<f64>> {
        if self.points.is_empty() {
            return None;
        }
        let n = self.points.len() as f64;
        let sum = self
            .points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords());
        Some(sum / n)
    }

    /// Maps every coordinate through `f`, keeping intensity and rings.
    pub fn map_coords(&self, f: impl Fn(Vector3<f64>) -> Vector3<f64>) -> PointCloud {
        let points = self
            .points
            .iter()
            .map(|p| p.with_coords(f(p.coords())))
            .collect();
        PointCloud::from_parts(self.frame_id.clone(), points, self.ring.clone())
    }

    /// Keeps the points at the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let points = indices.iter().map(|&i| self.points[i]).collect();
        let ring = self
            .ring
            .as_ref()
            .map(|r| indices.iter().map(|&i| r[i]).collect());
        PointCloud::from_parts(self.frame_id.clone(), points, ring)
    }

    /// Drops points closer than `min_range` to the sensor origin.
    pub fn retain_min_range(&self, min_range: f64) -> PointCloud {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.points[i].range() > min_range)
            .collect();
        self.select(&keep)
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointCloud {
        self.map_coords(|v| t.apply(&v))
    }
}

/// Applies a validated rigid transform to every point.
pub fn transform(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    cloud.transformed(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

const ORTHONORMAL_TOL: f64 = 1e-9;

impl RigidTransform {
    /// Rejects rotations that are not orthonormal with determinant +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let gram = rotation.transpose() * rotation - Matrix3::identity();
        let deviation = gram.abs().max().max((rotation.determinant() - 1.0).abs());
        if !deviation.is_finite() || deviation > ORTHONORMAL_TOL || !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::NonOrthonormal { deviation });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Rotation by `yaw` radians about the vertical axis, then translation.
    pub fn from_yaw(yaw: f64, t: Vector3<f64>) -> Self {
        Self {
            rotation: *Rotation3::from_axis_angle(&Vector3::z_axis(), yaw).matrix(),
            translation: t,
        }
    }

    /// Yaw rotation about a vertical axis passing through `pivot`.
    pub fn yaw_about(yaw: f64, pivot: Vector3<f64>) -> Self {
        let r = Self::from_yaw(yaw, Vector3::zeros());
        let translation = pivot - r.rotation * pivot;
        Self {
            rotation: r.rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation_vector(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }

    /// Yaw angle if the rotation is purely about the vertical axis.
    pub fn yaw(&self) -> Option<f64> {
        let r = &self.rotation;
        let tilt = r[(2, 0)].abs() + r[(2, 1)].abs() + r[(0, 2)].abs() + r[(1, 2)].abs();
        (tilt <= ORTHONORMAL_TOL && (r[(2, 2)] - 1.0).abs() <= ORTHONORMAL_TOL)
            .then(|| r[(1, 0)].atan2(r[(0, 0)]))
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Oriented 3D box. `center` is the geometric center; `dims` are
/// (length along heading, width, height).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox3D {
    center: Vector3<f64>,
    dims: Vector3<f64>,
    yaw: f64,
    label: String,
}

impl BoundingBox3D {
    pub fn new(center: [f64; 3], dims: [f64; 3], yaw: f64, label: impl Into<String>) -> Result<Self> {
        if !center.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidBox("non-finite center".into()));
        }
        if !dims.iter().all(|&d| d.is_finite() && d > 0.0) {
            return Err(Error::InvalidBox(format!(
                "dimensions must be strictly positive, got {dims:?}"
            )));
        }
        if !yaw.is_finite() {
            return Err(Error::InvalidBox("non-finite yaw".into()));
        }
        Ok(Self {
            center: Vector3::from(center),
            dims: Vector3::from(dims),
            yaw: wrap_angle(yaw),
            label: label.into(),
        })
    }

    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn length(&self) -> f64 {
        self.dims.x
    }

    pub fn width(&self) -> f64 {
        self.dims.y
    }

    pub fn height(&self) -> f64 {
        self.dims.z
    }

    pub fn dims(&self) -> Vector3<f64> {
        self.dims
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn volume(&self) -> f64 {
        self.dims.x * self.dims.y * self.dims.z
    }

    pub fn top_z(&self) -> f64 {
        self.center.z + 0.5 * self.dims.z
    }

    pub fn bottom_z(&self) -> f64 {
        self.center.z - 0.5 * self.dims.z
    }

    /// Heading (length) axis in the scene frame.
    pub fn heading_axis(&self) -> Vector3<f64> {
        Vector3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }

    /// Lateral (width) axis, pointing to the box's left.
    pub fn lateral_axis(&self) -> Vector3<f64> {
        Vector3::new(-self.yaw.sin(), self.yaw.cos(), 0.0)
    }

    /// Box-local coordinates of a scene-frame position.
    pub fn to_local(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let d = v - self.center;
        let (s, c) = self.yaw.sin_cos();
        Vector3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// Scene-frame position of box-local coordinates.
    pub fn to_scene(&self, local: &Vector3<f64>) -> Vector3<f64> {
        let (s, c) = self.yaw.sin_cos();
        Vector3::new(
            c * local.x - s * local.y,
            s * local.x + c * local.y,
            local.z,
        ) + self.center
    }

    pub fn contains(&self, v: &Vector3<f64>, margin: f64) -> bool {
        let l = self.to_local(v);
        let half = self.dims * 0.5;
        l.x.abs() <= half.x + margin && l.y.abs() <= half.y + margin && l.z.abs() <= half.z + margin
    }

    /// Bird's-eye corners in counter-clockwise order.
    pub fn bev_corners(&self) -> [[f64; 2]; 4] {
        let hl = 0.5 * self.dims.x;
        let hw = 0.5 * self.dims.y;
        [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)].map(|(lx, ly)| {
            let p = self.to_scene(&Vector3::new(lx, ly, 0.0));
            [p.x, p.y]
        })
    }

    /// Applies a transform whose rotation is a pure yaw.
    pub fn transformed(&self, t: &RigidTransform) -> Result<Self> {
        let yaw = t
            .yaw()
            .ok_or_else(|| Error::InvalidBox("box transforms must rotate about z only".into()))?;
        let c = t.apply(&self.center);
        Self::new([c.x, c.y, c.z], self.dims.into(), self.yaw + yaw, self.label.clone())
    }
}

/// Points whose box-frame coordinates lie within `dims / 2 + margin`.
pub fn crop_to_box(cloud: &PointCloud, bbox: &BoundingBox3D, margin: f64) -> PointCloud {
    cloud.select(&crop_indices(cloud, bbox, margin))
}

pub fn crop_indices(cloud: &PointCloud, bbox: &BoundingBox3D, margin: f64) -> Vec<usize> {
    let margin = margin.max(0.0);
    cloud
        .points()
        .iter()
        .enumerate()
        .filter(|(_, p)| bbox.contains(&p.coords(), margin))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn cloud(points: &[(f64, f64, f64)]) -> PointCloud {
        PointCloud::new("t", points.iter().map(|&(x, y, z)| Point::xyz(x, y, z)).collect()).unwrap()
    }

    #[test]
    fn identity_transform_is_noop() {
        let c = cloud(&[(1.0, 2.0, 3.0), (-4.0, 0.5, 2.0)]);
        assert_eq!(transform(&c, &RigidTransform::identity()), c);
    }

    #[test]
    fn pure_translation() {
        let c = cloud(&[(0.0, 0.0, 0.0)]);
        let out = transform(&c, &RigidTransform::translation(Vector3::new(1.0, 0.0, 0.0)));
        assert_eq!(out.points()[0], Point::xyz(1.0, 0.0, 0.0));
    }

    #[test]
    fn quarter_yaw_rotation() {
        let c = cloud(&[(1.0, 0.0, 0.0)]);
        let out = transform(&c, &RigidTransform::from_yaw(FRAC_PI_2, Vector3::zeros()));
        let p = out.points()[0];
        assert!(p.x.abs() < 1e-9 && (p.y - 1.0).abs() < 1e-9 && p.z.abs() < 1e-9);
    }

    #[test]
    fn rejects_non_orthonormal_rotation() {
        let scaled = Matrix3::identity() * 1.01;
        assert!(matches!(
            RigidTransform::new(scaled, Vector3::zeros()),
            Err(Error::NonOrthonormal { .. })
        ));
        let reflection = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        assert!(RigidTransform::new(reflection, Vector3::zeros()).is_err());
    }

    #[test]
    fn transform_keeps_intensity_and_rings() {
        let c = PointCloud::new("r", vec![Point::new(1.0, 1.0, 1.0, 0.7)])
            .unwrap()
            .with_rings(vec![5])
            .unwrap();
        let out = c.transformed(&RigidTransform::from_yaw(0.3, Vector3::new(1.0, 2.0, 3.0)));
        assert_eq!(out.points()[0].intensity, 0.7);
        assert_eq!(out.rings(), Some(&[5u16][..]));
    }

    #[test]
    fn rejects_bad_points() {
        assert!(PointCloud::new("x", vec![Point::xyz(f64::NAN, 0.0, 0.0)]).is_err());
        assert!(PointCloud::new("x", vec![Point::new(0.0, 0.0, 0.0, 1.5)]).is_err());
    }

    #[test]
    fn box_validation_and_yaw_wrap() {
        assert!(BoundingBox3D::new([0.0; 3], [1.0, 0.0, 1.0], 0.0, "Car").is_err());
        let b = BoundingBox3D::new([0.0; 3], [1.0, 1.0, 1.0], 3.0 * PI, "Car").unwrap();
        assert!((b.yaw() - PI).abs() < 1e-12);
        let b = BoundingBox3D::new([0.0; 3], [1.0, 1.0, 1.0], -PI, "Car").unwrap();
        assert!((b.yaw() - PI).abs() < 1e-12);
    }

    #[test]
    fn crop_center_and_exterior() {
        let b = BoundingBox3D::new([0.0; 3], [1.0, 1.0, 1.0], 0.0, "Car").unwrap();
        let c = cloud(&[(0.0, 0.0, 0.0), (10.0, 10.0, 10.0)]);
        let kept = crop_to_box(&c, &b, 0.0);
        assert_eq!(kept.points(), &[Point::xyz(0.0, 0.0, 0.0)]);
    }

    #[test]
    fn crop_margin_extends_box() {
        let b = BoundingBox3D::new([0.0; 3], [2.0, 2.0, 2.0], 0.0, "Car").unwrap();
        let c = cloud(&[(1.2, 0.0, 0.0)]);
        assert!(crop_to_box(&c, &b, 0.0).is_empty());
        assert_eq!(crop_to_box(&c, &b, 0.25).len(), 1);
    }

    #[test]
    fn local_scene_roundtrip() {
        let b = BoundingBox3D::new([3.0, -2.0, 0.5], [4.0, 2.0, 1.5], 0.8, "Car").unwrap();
        let v = Vector3::new(1.0, 2.0, 3.0);
        let back = b.to_scene(&b.to_local(&v));
        assert!((back - v).norm() < 1e-12);
    }
}
