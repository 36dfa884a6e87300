use crate::cloud::{Point, PointCloud};
use crate::error::{Error, Result};
use crate::par;

use super::model::LaserModel;

/// Points closer than this to the sensor origin are rejected by [`project`].
pub const MIN_RANGE: f64 = 0.1;

/// `source_index` value of an empty cell.
pub const NO_SOURCE: u32 = u32::MAX;

/// A ring-by-azimuth depth grid with per-cell provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeImage {
    model: LaserModel,
    depth: Vec<f64>,
    intensity: Vec<f64>,
    source: Vec<u32>,
    dropped: usize,
}

impl RangeImage {
    pub fn empty(model: LaserModel) -> Self {
        let cells = model.ring_count() * model.azimuth_bins();
        Self {
            model,
            depth: vec![0.0; cells],
            intensity: vec![0.0; cells],
            source: vec![NO_SOURCE; cells],
            dropped: 0,
        }
    }

    /// Assembles an image from raw grids; [`backproject`] validates it.
    pub fn from_parts(model: LaserModel, depth: Vec<f64>, intensity: Vec<f64>, source: Vec<u32>) -> Result<Self> {
        let cells = model.ring_count() * model.azimuth_bins();
        if depth.len() != cells || intensity.len() != cells || source.len() != cells {
            return Err(Error::InvalidImage(format!("grids must have {cells} cells")));
        }
        Ok(Self {
            model,
            depth,
            intensity,
            source,
            dropped: 0,
        })
    }

    pub fn model(&self) -> &LaserModel {
        &self.model
    }

    pub fn height(&self) -> usize {
        self.model.ring_count()
    }

    pub fn width(&self) -> usize {
        self.model.azimuth_bins()
    }

    pub fn azimuth_origin(&self) -> f64 {
        self.model.azimuth_origin()
    }

    fn cell(&self, row: usize, col: usize) -> usize {
        row * self.width() + col
    }

    /// Stored depth, or `None` for an empty cell.
    pub fn depth(&self, row: usize, col: usize) -> Option<f64> {
        let c = self.cell(row, col);
        (self.source[c] != NO_SOURCE).then(|| self.depth[c])
    }

    pub fn source_index(&self, row: usize, col: usize) -> Option<usize> {
        let c = self.cell(row, col);
        (self.source[c] != NO_SOURCE).then(|| self.source[c] as usize)
    }

    pub fn depths(&self) -> &[f64] {
        &self.depth
    }

    pub fn sources(&self) -> &[u32] {
        &self.source
    }

    pub fn occupied(&self) -> usize {
        self.source.iter().filter(|&&s| s != NO_SOURCE).count()
    }

    /// Points that could not be assigned to any ring.
    pub fn dropped(&self) -> usize {
        self.dropped
    }
}

/// Where a point lands in the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellHit {
    pub row: usize,
    pub col: usize,
    pub depth: f64,
    /// Fraction of the row gap between the point and its beam.
    pub vertical_offset: f64,
    /// Fraction of the azimuth pitch between the point and its beam.
    pub horizontal_offset: f64,
}

/// Maps a point to its cell, or `None` when it is beyond one ring pitch
/// from every row.
pub fn locate(model: &LaserModel, p: &Point) -> Option<CellHit> {
    let d_xy = p.range_xy();
    let hit = model.assign_ring(d_xy, p.z)?;
    let (col, horizontal_offset) = model.column(p.azimuth());
    let dz = p.z - model.effective_height(hit.row);
    let beam_range = (d_xy * d_xy + dz * dz).sqrt();
    Some(CellHit {
        row: hit.row,
        col,
        depth: model.depth_from_beam_range(hit.row, beam_range),
        vertical_offset: hit.vertical_offset,
        horizontal_offset,
    })
}

/// Spherical projection with a z-buffer: each cell keeps its nearest
/// candidate; equal depths keep the lowest input index.
pub fn project(cloud: &PointCloud, model: &LaserModel) -> Result<RangeImage> {
    let points = cloud.points();
    if points.len() >= NO_SOURCE as usize {
        return Err(Error::InvalidImage("too many points".into()));
    }
    if let Some(index) = points.iter().position(|p| p.range() <= MIN_RANGE) {
        return Err(Error::PointTooClose {
            index,
            min_range: MIN_RANGE,
        });
    }
    let hits = par::map(points, |p| locate(model, p));

    let mut image = RangeImage::empty(model.clone());
    let width = model.azimuth_bins();
    for (i, hit) in hits.iter().enumerate() {
        let Some(h) = hit else {
            image.dropped += 1;
            continue;
        };
        let c = h.row * width + h.col;
        if image.source[c] == NO_SOURCE || h.depth < image.depth[c] {
            image.depth[c] = h.depth;
            image.intensity[c] = points[i].intensity;
            image.source[c] = i as u32;
        }
    }
    Ok(image)
}

/// Back-projection result: one point per occupied cell in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Backprojected {
    /// Ring channel holds the row index.
    pub cloud: PointCloud,
    /// Input index of the point that won each cell.
    pub sources: Vec<usize>,
}

/// One point per occupied cell at the cell's beam direction; the ring
/// channel carries the row index.
pub fn backproject(image: &RangeImage) -> Result<PointCloud> {
    backproject_with_sources(image).map(|b| b.cloud)
}

pub fn backproject_with_sources(image: &RangeImage) -> Result<Backprojected> {
    let model = &image.model;
    let width = image.width();
    let mut points = Vec::with_capacity(image.occupied());
    let mut rings = Vec::with_capacity(points.capacity());
    let mut sources = Vec::with_capacity(points.capacity());
    for (c, &src) in image.source.iter().enumerate() {
        if src == NO_SOURCE {
            continue;
        }
        let (row, col) = (c / width, c % width);
        let depth = image.depth[c];
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "cell ({row}, {col}) has non-positive depth {depth}"
            )));
        }
        let beam_range = model.beam_range(row, depth).ok_or_else(|| {
            Error::InvalidImage(format!("cell ({row}, {col}): depth {depth} below laser offset"))
        })?;
        let [x, y, z] = model.beam_point(row, col, beam_range);
        points.push(Point::new(x, y, z, image.intensity[c].clamp(0.0, 1.0)));
        rings.push(row as u16);
        sources.push(src as usize);
    }
    Ok(Backprojected {
        cloud: PointCloud::from_parts("", points, Some(rings)),
        sources,
    })
}

/// Points lost by a project/back-project round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundtripLoss {
    pub lost_count: usize,
    pub lost_fraction: f64,
    /// Portion of the loss from points outside every ring.
    pub dropped: usize,
}

pub fn roundtrip_loss(cloud: &PointCloud, model: &LaserModel) -> Result<RoundtripLoss> {
    if cloud.is_empty() {
        return Ok(RoundtripLoss {
            lost_count: 0,
            lost_fraction: 0.0,
            dropped: 0,
        });
    }
    let image = project(cloud, model)?;
    let lost_count = cloud.len() - image.occupied();
    Ok(RoundtripLoss {
        lost_count,
        lost_fraction: lost_count as f64 / cloud.len() as f64,
        dropped: image.dropped(),
    })
}
