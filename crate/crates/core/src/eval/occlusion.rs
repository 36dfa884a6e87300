use crate::cloud::{crop_indices, BoundingBox3D, PointCloud};
use crate::error::{Error, Result};

/// `1 - after / before`, clamped to `[0, 1]`.
pub fn occlusion_from_counts(before: usize, after: usize) -> Result<f64> {
    if before == 0 {
        return Err(Error::EmptyBeforeCount);
    }
    Ok((1.0 - after as f64 / before as f64).clamp(0.0, 1.0))
}

/// Fraction of the points inside `bbox` that disappear between `before`
/// and `after`.
pub fn occlusion_ratio(before: &PointCloud, after: &PointCloud, bbox: &BoundingBox3D, margin: f64) -> Result<f64> {
    occlusion_from_counts(
        crop_indices(before, bbox, margin).len(),
        crop_indices(after, bbox, margin).len(),
    )
}
