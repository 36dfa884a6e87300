use nalgebra::Vector3;

use crate::cloud::{PointCloud, RigidTransform};
use crate::error::{Error, Result};

use super::config::check_angle;

/// Heading of the dominant horizontal axis of the point spread.
pub fn principal_yaw(cloud: &PointCloud) -> Result<f64> {
    let c = cloud.centroid().ok_or(Error::EmptyCloud)?;
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for p in cloud.points() {
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    Ok(0.5 * (2.0 * cxy).atan2(cxx - cyy))
}

/// Half the vertical extent of the cloud.
pub fn half_height(cloud: &PointCloud) -> Result<f64> {
    let (lo, hi) = cloud
        .points()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
    if lo > hi {
        return Err(Error::EmptyCloud);
    }
    Ok(0.5 * (hi - lo))
}

/// Rigid motion that aligns the object's principal axis with `tangent_yaw`
/// and moves the point `A = centroid + (0, 0, half_height)` onto `anchor`.
pub fn placement_transform(object: &PointCloud, anchor: &Vector3<f64>, tangent_yaw: f64) -> Result<RigidTransform> {
    let centroid = object.centroid().ok_or(Error::EmptyCloud)?;
    let align = RigidTransform::yaw_about(tangent_yaw - principal_yaw(object)?, centroid);
    let a = centroid + Vector3::new(0.0, 0.0, half_height(object)?);
    Ok(RigidTransform::translation(anchor - a).compose(&align))
}

pub fn place_object(object: &PointCloud, anchor: &Vector3<f64>, tangent_yaw: f64) -> Result<PointCloud> {
    Ok(object.transformed(&placement_transform(object, anchor, tangent_yaw)?))
}

/// Yaws the object about the vertical axis through its centroid.
/// Positive angles turn counter-clockwise seen from above.
pub fn rotate_spray(object: &PointCloud, angle_deg: f64) -> Result<PointCloud> {
    check_angle(angle_deg)?;
    if angle_deg == 0.0 {
        return Ok(object.clone());
    }
    let centroid = object.centroid().ok_or(Error::EmptyCloud)?;
    Ok(object.transformed(&RigidTransform::yaw_about(angle_deg.to_radians(), centroid)))
}
