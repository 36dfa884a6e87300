use crate::cloud::PointCloud;
use crate::error::Result;
use crate::rangesim::{locate, LaserModel, MIN_RANGE};

use super::config::check_density;

/// Per-point beam offsets, computed once and reused across density limits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateProfile {
    /// `(horizontal, vertical)` offsets; `None` when the point misses every beam.
    offsets: Vec<Option<(f64, f64)>>,
}

impl GateProfile {
    pub fn new(object: &PointCloud, model: &LaserModel) -> Self {
        let offsets = object
            .points()
            .iter()
            .map(|p| {
                if p.range() <= MIN_RANGE {
                    return None;
                }
                locate(model, p).map(|h| (h.horizontal_offset, h.vertical_offset))
            })
            .collect();
        Self { offsets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[Option<(f64, f64)>] {
        &self.offsets
    }

    /// Indices of points within `d_h` and `d_v` of their beam.
    pub fn retained(&self, d_h: f64, d_v: f64) -> Vec<usize> {
        self.offsets
            .iter()
            .enumerate()
            .filter_map(|(i, o)| match o {
                Some((h, v)) if *h <= d_h && *v <= d_v => Some(i),
                _ => None,
            })
            .collect()
    }
}

/// Keeps object points that lie within `d_h` / `d_v` of a beam, as
/// fractions of the azimuth and ring pitch.
pub fn density_gate(object: &PointCloud, model: &LaserModel, d_h: f64, d_v: f64) -> Result<PointCloud> {
    check_density("d_h", d_h)?;
    check_density("d_v", d_v)?;
    Ok(object.select(&GateProfile::new(object, model).retained(d_h, d_v)))
}
