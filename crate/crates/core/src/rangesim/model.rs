use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_AZIMUTH_BINS: usize = 2048;
pub const MIN_AZIMUTH_BINS: usize = 16;

/// One laser: beams leave `(0, 0, height)` at `inclination` radians above the
/// horizontal, so its returns satisfy `z = tan(inclination) * d_xy + height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub inclination: f64,
    pub height: f64,
}

/// Result of assigning a point to its nearest laser row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingHit {
    pub row: usize,
    /// `z - (tan(theta) * d_xy + h)` for the chosen row, meters.
    pub residual: f64,
    /// `|residual|` as a fraction of the vertical gap to the neighbouring
    /// row on the residual's side, evaluated at the point's `d_xy`.
    pub vertical_offset: f64,
}

/// Per-ring sensor model with a fixed azimuth discretization.
///
/// Rows are ordered by decreasing inclination (row 0 is the top laser).
#[derive(Debug, Clone, PartialEq)]
pub struct LaserModel {
    rings: Vec<Ring>,
    azimuth_bins: usize,
    azimuth_origin: f64,
    use_corrected_backprojection: bool,
    corrected_radicand: bool,
    tans: Vec<f64>,
    heights: Vec<f64>,
    /// Horizontal distance beyond which the rows' z-lines are sorted.
    monotone_beyond: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    azimuth_bins: usize,
    #[serde(default = "default_origin")]
    azimuth_origin: f64,
    #[serde(default = "default_true")]
    use_corrected_backprojection: bool,
    #[serde(default)]
    corrected_radicand: bool,
    rings: Vec<Ring>,
}

fn default_origin() -> f64 {
    -PI
}

fn default_true() -> bool {
    true
}

impl LaserModel {
    /// Builds a model with the non-coincident-origin back-projection enabled,
    /// `azimuth_origin = -pi` and the printed radicand.
    pub fn new(rings: Vec<Ring>, azimuth_bins: usize) -> Result<Self> {
        Self::build(rings, azimuth_bins, -PI, true, false)
    }

    fn build(
        rings: Vec<Ring>,
        azimuth_bins: usize,
        azimuth_origin: f64,
        use_corrected_backprojection: bool,
        corrected_radicand: bool,
    ) -> Result<Self> {
        if rings.is_empty() {
            return Err(Error::InvalidModel("no rings".into()));
        }
        if azimuth_bins < MIN_AZIMUTH_BINS {
            return Err(Error::InvalidModel(format!(
                "azimuth_bins must be >= {MIN_AZIMUTH_BINS}, got {azimuth_bins}"
            )));
        }
        if !azimuth_origin.is_finite() {
            return Err(Error::InvalidModel("non-finite azimuth origin".into()));
        }
        for (i, r) in rings.iter().enumerate() {
            if !(r.inclination.is_finite() && r.inclination.abs() < FRAC_PI_2) {
                return Err(Error::InvalidModel(format!("ring {i}: inclination out of range")));
            }
            if !(r.height.is_finite() && r.height.abs() < 1.0) {
                return Err(Error::InvalidModel(format!("ring {i}: |height| must be < 1 m")));
            }
        }
        if rings.windows(2).any(|w| w[0].inclination <= w[1].inclination) {
            return Err(Error::InvalidModel(
                "inclinations must be strictly decreasing by row".into(),
            ));
        }
        let tans: Vec<f64> = rings.iter().map(|r| r.inclination.tan()).collect();
        let heights: Vec<f64> = rings
            .iter()
            .map(|r| if use_corrected_backprojection { r.height } else { 0.0 })
            .collect();
        let monotone_beyond = (0..rings.len().saturating_sub(1))
            .map(|i| (heights[i + 1] - heights[i]) / (tans[i] - tans[i + 1]))
            .fold(0.0, f64::max);
        Ok(Self {
            rings,
            azimuth_bins,
            azimuth_origin,
            use_corrected_backprojection,
            corrected_radicand,
            tans,
            heights,
            monotone_beyond,
        })
    }

    /// Sorts rings by decreasing inclination before building.
    pub fn from_unsorted(mut rings: Vec<Ring>, azimuth_bins: usize) -> Result<Self> {
        rings.sort_by(|a, b| b.inclination.total_cmp(&a.inclination));
        Self::new(rings, azimuth_bins)
    }

    /// `count` rings evenly spaced from `top` down to `bottom` radians, all at
    /// the sensor origin.
    pub fn uniform(count: usize, top: f64, bottom: f64, azimuth_bins: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidModel("no rings".into()));
        }
        let step = if count > 1 { (top - bottom) / (count - 1) as f64 } else { 0.0 };
        let rings = (0..count)
            .map(|i| Ring {
                inclination: top - step * i as f64,
                height: 0.0,
            })
            .collect();
        Self::new(rings, azimuth_bins)
    }

    /// 64 rings spanning +2.0 to -24.8 degrees, like the sensor used for KITTI.
    pub fn kitti_like() -> Self {
        Self::uniform(64, 2.0f64.to_radians(), (-24.8f64).to_radians(), DEFAULT_AZIMUTH_BINS)
            .expect("static model is valid")
    }

    pub fn with_heights(&self, heights: &[f64]) -> Result<Self> {
        if heights.len() != self.rings.len() {
            return Err(Error::InvalidModel("height count differs from ring count".into()));
        }
        let rings = self
            .rings
            .iter()
            .zip(heights)
            .map(|(r, &h)| Ring { inclination: r.inclination, height: h })
            .collect();
        self.rebuild(rings, self.use_corrected_backprojection, self.corrected_radicand)
    }

    /// Toggles between the per-ring origin model and the shared-origin model
    /// (every `h_i` treated as zero in both directions).
    pub fn with_corrected_backprojection(&self, on: bool) -> Self {
        self.rebuild(self.rings.clone(), on, self.corrected_radicand)
            .expect("same rings remain valid")
    }

    /// Replaces `h^2 cos(theta)` under the back-projection square root with
    /// `h^2 cos^2(theta)`, which makes the stored depth the true range.
    pub fn with_corrected_radicand(&self, on: bool) -> Self {
        self.rebuild(self.rings.clone(), self.use_corrected_backprojection, on)
            .expect("same rings remain valid")
    }

    pub fn with_azimuth_origin(&self, origin: f64) -> Result<Self> {
        Self::build(
            self.rings.clone(),
            self.azimuth_bins,
            origin,
            self.use_corrected_backprojection,
            self.corrected_radicand,
        )
    }

    pub fn with_azimuth_bins(&self, bins: usize) -> Result<Self> {
        Self::build(
            self.rings.clone(),
            bins,
            self.azimuth_origin,
            self.use_corrected_backprojection,
            self.corrected_radicand,
        )
    }

    /// Keeps every `step`-th ring, starting from the top.
    pub fn decimated(&self, step: usize) -> Result<Self> {
        let rings = self.rings.iter().step_by(step.max(1)).copied().collect();
        self.rebuild(rings, self.use_corrected_backprojection, self.corrected_radicand)
    }

    fn rebuild(&self, rings: Vec<Ring>, corrected: bool, radicand: bool) -> Result<Self> {
        Self::build(rings, self.azimuth_bins, self.azimuth_origin, corrected, radicand)
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn ring_count(&self) -> usize {
        self.rings.len()
    }

    pub fn azimuth_bins(&self) -> usize {
        self.azimuth_bins
    }

    pub fn azimuth_origin(&self) -> f64 {
        self.azimuth_origin
    }

    pub fn azimuth_pitch(&self) -> f64 {
        TAU / self.azimuth_bins as f64
    }

    pub fn use_corrected_backprojection(&self) -> bool {
        self.use_corrected_backprojection
    }

    pub fn corrected_radicand(&self) -> bool {
        self.corrected_radicand
    }

    /// Laser origin height actually used (zero in shared-origin mode).
    pub fn effective_height(&self, row: usize) -> f64 {
        self.heights[row]
    }

    fn line_z(&self, row: usize, d_xy: f64) -> f64 {
        self.tans[row] * d_xy + self.heights[row]
    }

    /// Row whose z-line `tan(theta_i) * d_xy + h_i` is closest to `z`
    /// (lowest row on ties), or `None` when the point is more than one row
    /// pitch beyond the outermost rows.
    pub fn assign_ring(&self, d_xy: f64, z: f64) -> Option<RingHit> {
        let n = self.rings.len();
        let row = if d_xy >= self.monotone_beyond {
            // Lines are non-increasing in row here: bracket z and compare.
            let split = partition_point(n, |i| self.line_z(i, d_xy) > z);
            match split {
                0 => 0,
                s if s == n => n - 1,
                s => {
                    let above = (z - self.line_z(s - 1, d_xy)).abs();
                    let below = (z - self.line_z(s, d_xy)).abs();
                    if below < above { s } else { s - 1 }
                }
            }
        } else {
            let mut best = 0;
            let mut best_r = f64::INFINITY;
            for i in 0..n {
                let r = (z - self.line_z(i, d_xy)).abs();
                if r < best_r {
                    best = i;
                    best_r = r;
                }
            }
            best
        };
        let residual = z - self.line_z(row, d_xy);
        let toward = if residual > 0.0 { row.checked_sub(1) } else { Some(row + 1).filter(|&r| r < n) };
        let neighbour = toward.or_else(|| {
            if residual > 0.0 { Some(row + 1).filter(|&r| r < n) } else { row.checked_sub(1) }
        });
        let vertical_offset = match neighbour {
            None => 0.0,
            Some(nb) => {
                let gap = (self.line_z(nb, d_xy) - self.line_z(row, d_xy)).abs();
                if residual == 0.0 {
                    0.0
                } else if gap > 0.0 {
                    residual.abs() / gap
                } else {
                    f64::INFINITY
                }
            }
        };
        (vertical_offset <= 1.0).then_some(RingHit {
            row,
            residual,
            vertical_offset,
        })
    }

    /// Column of azimuth `phi` and its distance from the column's center
    /// direction in units of the azimuth pitch (always in `[0, 0.5]`).
    pub fn column(&self, phi: f64) -> (usize, f64) {
        let w = self.azimuth_bins as f64;
        let t = w * (phi - self.azimuth_origin).rem_euclid(TAU) / TAU;
        let col = (t.floor() as usize).min(self.azimuth_bins - 1);
        (col, (t - col as f64 - 0.5).abs())
    }

    /// Azimuth of the beam at the center of column `col`.
    pub fn column_azimuth(&self, col: usize) -> f64 {
        self.azimuth_origin + (col as f64 + 0.5) * self.azimuth_pitch()
    }

    fn radicand_cos(&self, row: usize) -> f64 {
        let c = self.rings[row].inclination.cos();
        if self.corrected_radicand { c * c } else { c }
    }

    /// Depth stored in the range image for a return at distance
    /// `beam_range` from the row's laser origin. Inverse of
    /// [`LaserModel::beam_range`].
    pub fn depth_from_beam_range(&self, row: usize, beam_range: f64) -> f64 {
        if !self.use_corrected_backprojection {
            return beam_range;
        }
        let h = self.heights[row];
        let s = self.rings[row].inclination.sin();
        let a = beam_range + h * s;
        (a * a + h * h * self.radicand_cos(row)).sqrt()
    }

    /// Back-projection distance `d' = sqrt(d^2 - h^2 cos(theta)) - h sin(theta)`,
    /// or `d` itself in shared-origin mode.
    pub fn beam_range(&self, row: usize, depth: f64) -> Option<f64> {
        if !self.use_corrected_backprojection {
            return Some(depth);
        }
        let h = self.heights[row];
        let s = self.rings[row].inclination.sin();
        let rad = depth * depth - h * h * self.radicand_cos(row);
        (rad >= 0.0).then(|| rad.sqrt() - h * s)
    }

    /// Point reached by the beam of (`row`, `col`) after `beam_range` meters.
    pub fn beam_point(&self, row: usize, col: usize, beam_range: f64) -> [f64; 3] {
        let theta = self.rings[row].inclination;
        let phi = self.column_azimuth(col);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        [
            beam_range * ct * cp,
            beam_range * ct * sp,
            beam_range * st + self.heights[row],
        ]
    }

    pub fn to_toml(&self) -> String {
        let file = ModelFile {
            azimuth_bins: self.azimuth_bins,
            azimuth_origin: self.azimuth_origin,
            use_corrected_backprojection: self.use_corrected_backprojection,
            corrected_radicand: self.corrected_radicand,
            rings: self.rings.clone(),
        };
        toml::to_string(&file).expect("model serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let f: ModelFile =
            toml::from_str(text).map_err(|e| Error::InvalidModel(e.message().to_string()))?;
        Self::build(
            f.rings,
            f.azimuth_bins,
            f.azimuth_origin,
            f.use_corrected_backprojection,
            f.corrected_radicand,
        )
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::malformed(path, e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}

/// First index in `0..n` for which `pred` is false, assuming `pred` holds
/// on a prefix.
fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}
