//! Point-set distances (Chamfer, Hausdorff) backed by an exact
//! nearest-neighbor index.
//!
//! The index is a uniform grid with shell-by-shell expansion; below
//! [`BRUTE_FORCE_LIMIT`] target points it falls back to a linear scan. Both
//! strategies evaluate the same squared-distance expression on the same
//! candidate pairs, so they return bit-identical minima.

use crate::cloud::{Point, PointCloud};
use crate::error::{Error, Result};
use crate::par;

pub const BRUTE_FORCE_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Grid for large targets, linear scan below [`BRUTE_FORCE_LIMIT`].
    Auto,
    BruteForce,
    Grid,
}

pub struct NeighborIndex<'a> {
    points: &'a [Point],
    grid: Option<Grid>,
}

struct Grid {
    origin: [f64; 3],
    cell: f64,
    dims: [usize; 3],
    /// CSR layout: `order[start[c]..start[c + 1]]` are the points of cell `c`.
    start: Vec<u32>,
    order: Vec<u32>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        Self::with_strategy(points, SearchStrategy::Auto)
    }

    pub fn with_strategy(points: &'a [Point], strategy: SearchStrategy) -> Self {
        let use_grid = match strategy {
            SearchStrategy::Auto => points.len() >= BRUTE_FORCE_LIMIT,
            SearchStrategy::BruteForce => false,
            SearchStrategy::Grid => !points.is_empty(),
        };
        Self {
            points,
            grid: use_grid.then(|| Grid::build(points)),
        }
    }

    pub fn uses_grid(&self) -> bool {
        self.grid.is_some()
    }

    /// Squared distance from `q` to its nearest indexed point
    /// (`f64::INFINITY` for an empty index).
    pub fn nearest_distance_squared(&self, q: &Point) -> f64 {
        match &self.grid {
            Some(g) => g.nearest(self.points, q),
            None => self
                .points
                .iter()
                .map(|p| q.distance_squared(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn nearest_distance(&self, q: &Point) -> f64 {
        self.nearest_distance_squared(q).sqrt()
    }
}

impl Grid {
    fn build(points: &[Point]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for (k, v) in [p.x, p.y, p.z].into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        let extent: Vec<f64> = (0..3).map(|k| (hi[k] - lo[k]).max(1e-9)).collect();
        // Aim for roughly two points per occupied cell on a surface-like set.
        let target_cells = (points.len() as f64 / 2.0).max(1.0);
        let volume: f64 = extent.iter().product();
        let area = extent[0] * extent[1] + extent[1] * extent[2] + extent[0] * extent[2];
        let by_volume = (volume / target_cells).cbrt();
        let by_area = (area / target_cells).sqrt();
        let mut cell = by_volume.max(by_area * 0.5).max(1e-6);
        let dims_for = |cell: f64| -> [usize; 3] {
            [0, 1, 2].map(|k| ((extent[k] / cell).floor() as usize + 1).max(1))
        };
        let mut dims = dims_for(cell);
        while dims.iter().product::<usize>() > 4 * points.len() + 64 {
            cell *= 1.5;
            dims = dims_for(cell);
        }

        let ncells = dims.iter().product::<usize>();
        let mut counts = vec![0u32; ncells + 1];
        let keys: Vec<usize> = points
            .iter()
            .map(|p| {
                let c = Self::cell_of(&lo, cell, &dims, p);
                Self::flat(&dims, c)
            })
            .collect();
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for i in 0..ncells {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut order = vec![0u32; points.len()];
        for (i, &k) in keys.iter().enumerate() {
            order[fill[k] as usize] = i as u32;
            fill[k] += 1;
        }
        Self {
            origin: lo,
            cell,
            dims,
            start: counts,
            order,
        }
    }

    fn cell_of(origin: &[f64; 3], cell: f64, dims: &[usize; 3], p: &Point) -> [usize; 3] {
        let v = [p.x, p.y, p.z];
        [0, 1, 2].map(|k| {
            let i = ((v[k] - origin[k]) / cell).floor();
            (i.max(0.0) as usize).min(dims[k] - 1)
        })
    }

    fn flat(dims: &[usize; 3], c: [usize; 3]) -> usize {
        (c[2] * dims[1] + c[1]) * dims[0] + c[0]
    }

    fn nearest(&self, points: &[Point], q: &Point) -> f64 {
        let v = [q.x, q.y, q.z];
        // Signed cell coordinates of the query; may lie outside the grid.
        let qc: [i64; 3] = [0, 1, 2].map(|k| ((v[k] - self.origin[k]) / self.cell).floor() as i64);
        let hi: [i64; 3] = self.dims.map(|d| d as i64 - 1);
        // Chebyshev distance from the query cell to the grid's cell range.
        let r0 = (0..3)
            .map(|k| (-qc[k]).max(qc[k] - hi[k]).max(0))
            .max()
            .unwrap_or(0);
        let r_max = (0..3)
            .map(|k| (qc[k]).abs().max((qc[k] - hi[k]).abs()))
            .max()
            .unwrap_or(0);

        let mut best = f64::INFINITY;
        let mut r = r0;
        loop {
            self.scan_shell(points, q, qc, r, &mut best);
            // Every unvisited cell is at Chebyshev offset >= r + 1, so its
            // points are at least r * cell away from the query.
            let bound = r as f64 * self.cell * (1.0 - 1e-9);
            if (best.is_finite() && best <= bound * bound) || r >= r_max {
                return best;
            }
            r += 1;
        }
    }

    fn scan_shell(&self, points: &[Point], q: &Point, qc: [i64; 3], r: i64, best: &mut f64) {
        let lo: [i64; 3] = [0, 1, 2].map(|k| (qc[k] - r).max(0));
        let hi: [i64; 3] = [0, 1, 2].map(|k| (qc[k] + r).min(self.dims[k] as i64 - 1));
        if (0..3).any(|k| lo[k] > hi[k]) {
            return;
        }
        for z in lo[2]..=hi[2] {
            let on_z = (z - qc[2]).abs() == r;
            for y in lo[1]..=hi[1] {
                let on_y = on_z || (y - qc[1]).abs() == r;
                if on_y {
                    for x in lo[0]..=hi[0] {
                        self.scan_cell(points, q, [x, y, z], best);
                    }
                } else {
                    // Only the two x-faces of the shell.
                    for x in [qc[0] - r, qc[0] + r] {
                        if x >= lo[0] && x <= hi[0] && (r > 0 || x == qc[0]) {
                            self.scan_cell(points, q, [x, y, z], best);
                            if r == 0 {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }

    fn scan_cell(&self, points: &[Point], q: &Point, c: [i64; 3], best: &mut f64) {
        let k = Self::flat(&self.dims, c.map(|v| v as usize));
        let (a, b) = (self.start[k] as usize, self.start[k + 1] as usize);
        for &i in &self.order[a..b] {
            let d = q.distance_squared(&points[i as usize]);
            if d < *best {
                *best = d;
            }
        }
    }
}

/// Nearest-neighbor distance from each point of `from` into `to`.
pub fn nearest_distances(from: &PointCloud, to: &PointCloud) -> Vec<f64> {
    nearest_distances_with(from, to, SearchStrategy::Auto)
}

pub fn nearest_distances_with(from: &PointCloud, to: &PointCloud, strategy: SearchStrategy) -> Vec<f64> {
    let index = NeighborIndex::with_strategy(to.points(), strategy);
    par::map(from.points(), |p| index.nearest_distance(p))
}

fn check_non_empty(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Symmetric mean Chamfer distance:
/// `(mean_a min_b |a - b| + mean_b min_a |a - b|) / 2`.
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    chamfer_with(a, b, SearchStrategy::Auto)
}

pub fn chamfer_with(a: &PointCloud, b: &PointCloud, strategy: SearchStrategy) -> Result<f64> {
    check_non_empty(a, b)?;
    let ab = nearest_distances_with(a, b, strategy);
    let ba = nearest_distances_with(b, a, strategy);
    Ok(0.5 * (mean(&ab) + mean(&ba)))
}

/// Directed Hausdorff distance `max_a min_b |a - b|`.
pub fn directed_hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_non_empty(a, b)?;
    Ok(max(&nearest_distances(a, b)))
}

pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    hausdorff_with(a, b, SearchStrategy::Auto)
}

pub fn hausdorff_with(a: &PointCloud, b: &PointCloud, strategy: SearchStrategy) -> Result<f64> {
    check_non_empty(a, b)?;
    let ab = nearest_distances_with(a, b, strategy);
    let ba = nearest_distances_with(b, a, strategy);
    Ok(max(&ab).max(max(&ba)))
}
