//! K-frame random-object sequences (water mist, smoke).
//!
//! [`sample_sequence`] is a procedural plume generator split the same way as
//! a content/motion latent model: the content seed fixes everything that
//! stays constant over a sequence (lobe layout, extents, drift heading,
//! reflectance), and the motion seed drives the per-frame evolution (swirl,
//! breathing and the point resampling itself). Recorded sequences in the
//! on-disk layout read by [`load_rolid`] plug into the same interface.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::{Point, PointCloud};
use crate::distance;
use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    WaterMist,
    Smoke,
}

impl ObjectKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectKind::WaterMist => "water_mist",
            ObjectKind::Smoke => "smoke",
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "water_mist" | "mist" => Ok(ObjectKind::WaterMist),
            "smoke" => Ok(ObjectKind::Smoke),
            other => Err(Error::InvalidGenerator(format!("unknown object kind {other:?}"))),
        }
    }
}

/// Sequence length used for the attack experiments.
pub const DEFAULT_FRAMES: usize = 3;
/// Pre-reduction sampling length of the sequence model.
pub const DEFAULT_SAMPLE_LENGTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorLatents {
    /// Fixes the sequence's invariant content.
    pub content_seed: u64,
    /// Drives frame-to-frame change.
    pub motion_seed: u64,
    /// Output frame count K.
    pub frames: usize,
    /// Pre-reduction length N; kept as metadata, frames are sampled directly.
    pub sample_length: usize,
}

impl GeneratorLatents {
    pub fn new(content_seed: u64, motion_seed: u64, frames: usize) -> Self {
        Self {
            content_seed,
            motion_seed,
            frames,
            sample_length: DEFAULT_SAMPLE_LENGTH.max(frames),
        }
    }

    /// Derives both seeds from one 64-bit seed.
    pub fn from_seed(seed: u64, frames: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(rng.random(), rng.random(), frames)
    }

    fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::InvalidGenerator("frame count K must be >= 1".into()));
        }
        if self.sample_length < self.frames {
            return Err(Error::InvalidGenerator(format!(
                "sample length N = {} is shorter than K = {}",
                self.sample_length, self.frames
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlumeParams {
    pub kind: ObjectKind,
    /// Per-axis spread (sigma_x, sigma_y, sigma_z) in meters.
    pub base_extent: [f64; 3],
    pub point_count: usize,
    /// Centroid advection per frame, meters.
    pub drift_velocity: f64,
    /// Per-axis extent growth per frame, meters.
    pub dispersion_rate: f64,
    /// Radial profile exponent: density ~ exp(-r^p / 2); 2 is Gaussian.
    pub density_falloff: f64,
    /// Scale of the motion-seeded swirl and breathing; 0 freezes the shape.
    pub turbulence: f64,
}

pub const MIN_POINT_COUNT: usize = 64;

impl PlumeParams {
    pub fn water_mist() -> Self {
        Self {
            kind: ObjectKind::WaterMist,
            base_extent: [1.0, 0.45, 0.55],
            point_count: 1024,
            drift_velocity: 0.08,
            dispersion_rate: 0.03,
            density_falloff: 2.0,
            turbulence: 1.0,
        }
    }

    pub fn smoke() -> Self {
        Self {
            kind: ObjectKind::Smoke,
            base_extent: [1.4, 0.8, 0.8],
            point_count: 640,
            drift_velocity: 0.04,
            dispersion_rate: 0.05,
            density_falloff: 2.0,
            turbulence: 1.0,
        }
    }

    pub fn for_kind(kind: ObjectKind) -> Self {
        match kind {
            ObjectKind::WaterMist => Self::water_mist(),
            ObjectKind::Smoke => Self::smoke(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.base_extent.iter().all(|&e| e.is_finite() && e > 0.0) {
            return Err(Error::InvalidGenerator("extents must be positive".into()));
        }
        if self.point_count < MIN_POINT_COUNT {
            return Err(Error::InvalidGenerator(format!(
                "point_count must be >= {MIN_POINT_COUNT}"
            )));
        }
        let non_negative = [self.drift_velocity, self.dispersion_rate, self.turbulence];
        if !non_negative.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidGenerator(
                "drift, dispersion and turbulence must be non-negative".into(),
            ));
        }
        if !(self.density_falloff.is_finite() && self.density_falloff > 0.0) {
            return Err(Error::InvalidGenerator("density_falloff must be positive".into()));
        }
        Ok(())
    }
}

/// K object-only frames sharing one local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    frames: Vec<PointCloud>,
    kind: ObjectKind,
}

impl SequenceSample {
    pub fn new(frames: Vec<PointCloud>, kind: ObjectKind) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidGenerator("sequence has no frames".into()));
        }
        if let Some(k) = frames.iter().position(|f| f.is_empty()) {
            return Err(Error::InvalidGenerator(format!("frame {k} is empty")));
        }
        Ok(Self { frames, kind })
    }

    pub fn frames(&self) -> &[PointCloud] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn kind(&self) -> ObjectKind {
        self.kind
    }
}

struct Lobe {
    weight: f64,
    offset: Vector3<f64>,
    scale: f64,
}

struct Content {
    extent: Vector3<f64>,
    drift_dir: Vector3<f64>,
    lobes: Vec<Lobe>,
    intensity_mean: f64,
}

fn draw_content(seed: u64, params: &PlumeParams) -> Content {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aspect: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.8..1.25));
    let extent = Vector3::from(params.base_extent).component_mul(&Vector3::from(aspect));
    let heading = rng.random_range(-PI..PI);
    let drift_dir = Vector3::new(heading.cos(), heading.sin(), 0.0);

    let count = 3;
    let mut lobes: Vec<Lobe> = (0..count)
        .map(|_| {
            let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
            Lobe {
                weight: rng.random_range(0.5..1.5),
                offset: Vector3::from(g).component_mul(&extent) * 0.4,
                scale: rng.random_range(0.55..0.8),
            }
        })
        .collect();
    let total: f64 = lobes.iter().map(|l| l.weight).sum();
    for l in &mut lobes {
        l.weight /= total;
    }
    // Center the mixture so its expected centroid is the local origin.
    let mean = lobes
        .iter()
        .fold(Vector3::zeros(), |acc, l| acc + l.offset * l.weight);
    for l in &mut lobes {
        l.offset -= mean;
    }
    Content {
        extent,
        drift_dir,
        lobes,
        intensity_mean: rng.random_range(0.05..0.25),
    }
}

/// Samples a K-frame plume sequence. Identical inputs give bit-identical
/// output. Frames share a local frame whose origin is the first frame's
/// centroid, so drift shows up as centroid motion between frames.
pub fn sample_sequence(latents: &GeneratorLatents, params: &PlumeParams) -> Result<SequenceSample> {
    latents.validate()?;
    params.validate()?;
    let content = draw_content(latents.content_seed, params);
    let mut rng = ChaCha8Rng::seed_from_u64(latents.motion_seed);

    let radial = Gamma::new(3.0 / params.density_falloff, 1.0)
        .map_err(|e| Error::InvalidGenerator(e.to_string()))?;
    let intensity_noise = Normal::new(0.0, 0.05).expect("valid sigma");
    let swirl_step = Normal::new(0.0, 0.05 * params.turbulence.max(1e-300)).expect("valid sigma");
    let breath = Normal::new(0.0, 0.03 * params.turbulence.max(1e-300)).expect("valid sigma");
    let cumulative: Vec<f64> = content
        .lobes
        .iter()
        .scan(0.0, |acc, l| {
            *acc += l.weight;
            Some(*acc)
        })
        .collect();

    let mut swirl = 0.0;
    let mut frames = Vec::with_capacity(latents.frames);
    for k in 0..latents.frames {
        let (breathing, swirl_now) = if params.turbulence > 0.0 {
            if k > 0 {
                swirl += swirl_step.sample(&mut rng);
            }
            (breath.sample(&mut rng).exp(), swirl)
        } else {
            (1.0, 0.0)
        };
        let grow = Vector3::repeat(params.dispersion_rate * k as f64);
        let sigma = content.extent * breathing + grow;
        let stretch = sigma.component_div(&content.extent);
        let center = content.drift_dir * (params.drift_velocity * k as f64);
        let (s, c) = swirl_now.sin_cos();

        let mut points = Vec::with_capacity(params.point_count);
        for _ in 0..params.point_count {
            let u: f64 = rng.random();
            let j = cumulative.iter().position(|&w| u < w).unwrap_or(content.lobes.len() - 1);
            let lobe = &content.lobes[j];
            let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let g = Vector3::from(g);
            let dir = g / g.norm().max(1e-300);
            let r = (2.0 * radial.sample(&mut rng)).powf(1.0 / params.density_falloff);
            let local = lobe.offset.component_mul(&stretch) + sigma.component_mul(&dir) * (r * lobe.scale);
            let rotated = Vector3::new(c * local.x - s * local.y, s * local.x + c * local.y, local.z);
            let p = rotated + center;
            let intensity = (content.intensity_mean + intensity_noise.sample(&mut rng)).clamp(0.0, 1.0);
            points.push(Point::new(p.x, p.y, p.z, intensity));
        }
        frames.push(PointCloud::from_parts(format!("{}_{k:06}", params.kind), points, None));
    }

    let origin = frames[0].centroid().expect("frames are non-empty");
    let frames = frames
        .into_iter()
        .map(|f| f.map_coords(|v| v - origin))
        .collect();
    SequenceSample::new(frames, params.kind)
}

/// Recording metadata from `meta.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RolidMeta {
    pub kind: ObjectKind,
    pub pressure_mpa: Option<f64>,
    pub distance_m: Option<f64>,
}

impl RolidMeta {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut kind = None;
        let mut pressure_mpa = None;
        let mut distance_m = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::malformed(path, format!("expected key=value, got {line:?}")))?;
            let number = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::malformed(path, format!("bad number for {key}: {v:?}")))
            };
            match key.trim() {
                "kind" => kind = Some(value.parse().map_err(|e: Error| Error::malformed(path, e.to_string()))?),
                "pressure_mpa" => pressure_mpa = Some(number(value)?),
                "distance_m" => distance_m = Some(number(value)?),
                _ => {}
            }
        }
        Ok(Self {
            kind: kind.ok_or_else(|| Error::malformed(path, "missing kind="))?,
            pressure_mpa,
            distance_m,
        })
    }

    pub fn render(&self) -> String {
        let mut out = format!("kind={}\n", self.kind);
        if let Some(p) = self.pressure_mpa {
            out.push_str(&format!("pressure_mpa={p}\n"));
        }
        if let Some(d) = self.distance_m {
            out.push_str(&format!("distance_m={d}\n"));
        }
        out
    }
}

fn frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let is_frame = name
            .strip_prefix("frame_")
            .and_then(|s| s.strip_suffix(".bin"))
            .is_some_and(|digits| digits.len() == 6 && digits.bytes().all(|b| b.is_ascii_digit()));
        if is_frame {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads `<dir>/frame_%06d.bin` in filename order plus `<dir>/meta.txt`.
/// Each frame is re-centered on its own centroid.
pub fn load_rolid(dir: impl AsRef<Path>) -> Result<(SequenceSample, RolidMeta)> {
    let dir = dir.as_ref();
    let meta_path = dir.join("meta.txt");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta = RolidMeta::parse(&text, &meta_path)?;
    let files = frame_files(dir)?;
    if files.is_empty() {
        return Err(Error::malformed(dir, "no frame_%06d.bin files"));
    }
    let mut frames = Vec::with_capacity(files.len());
    for path in &files {
        let cloud = io::read_frame(path)?;
        let centroid = cloud
            .centroid()
            .ok_or_else(|| Error::malformed(path, "empty frame"))?;
        frames.push(cloud.map_coords(|v| v - centroid));
    }
    Ok((SequenceSample::new(frames, meta.kind)?, meta))
}

/// Writes a sequence in the layout read by [`load_rolid`].
pub fn write_rolid(dir: impl AsRef<Path>, sample: &SequenceSample, meta: &RolidMeta) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (k, frame) in sample.frames().iter().enumerate() {
        io::write_frame(dir.join(format!("frame_{k:06}.bin")), frame)?;
    }
    let meta_path = dir.join("meta.txt");
    fs::write(&meta_path, meta.render()).map_err(|e| Error::io(&meta_path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealismReport {
    /// (Hausdorff, Chamfer) per frame index.
    pub rows: Vec<(f64, f64)>,
}

impl RealismReport {
    pub fn mean_hausdorff(&self) -> f64 {
        self.rows.iter().map(|r| r.0).sum::<f64>() / self.rows.len().max(1) as f64
    }

    pub fn mean_chamfer(&self) -> f64 {
        self.rows.iter().map(|r| r.1).sum::<f64>() / self.rows.len().max(1) as f64
    }

    /// CSV table with a trailing `mean` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,hausdorff,chamfer\n");
        for (k, (h, c)) in self.rows.iter().enumerate() {
            out.push_str(&format!("{k},{h:.4},{c:.4}\n"));
        }
        out.push_str(&format!("mean,{:.4},{:.4}\n", self.mean_hausdorff(), self.mean_chamfer()));
        out
    }
}

/// Per-frame Hausdorff and Chamfer distances between equal-length sequences.
pub fn realism_report(generated: &SequenceSample, reference: &SequenceSample) -> Result<RealismReport> {
    if generated.len() != reference.len() {
        return Err(Error::FrameCountMismatch {
            left: generated.len(),
            right: reference.len(),
        });
    }
    let rows = generated
        .frames()
        .iter()
        .zip(reference.frames())
        .map(|(g, r)| Ok((distance::hausdorff(g, r)?, distance::chamfer(g, r)?)))
        .collect::<Result<_>>()?;
    Ok(RealismReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn latents(k: usize) -> GeneratorLatents {
        GeneratorLatents::new(11, 22, k)
    }

    #[test]
    fn shape_contract() {
        let s = sample_sequence(&latents(3), &PlumeParams::water_mist()).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.frames().iter().all(|f| f.len() == 1024));
        assert_eq!(s.kind(), ObjectKind::WaterMist);
    }

    #[test]
    fn zero_frames_rejected() {
        assert!(sample_sequence(&latents(0), &PlumeParams::smoke()).is_err());
        let mut l = latents(3);
        l.sample_length = 2;
        assert!(sample_sequence(&l, &PlumeParams::smoke()).is_err());
        let mut p = PlumeParams::smoke();
        p.point_count = 10;
        assert!(sample_sequence(&latents(3), &p).is_err());
    }

    #[test]
    fn deterministic_bytes() {
        let p = PlumeParams::smoke();
        let a = sample_sequence(&latents(3), &p).unwrap();
        let b = sample_sequence(&latents(3), &p).unwrap();
        for (fa, fb) in a.frames().iter().zip(b.frames()) {
            assert_eq!(io::encode_frame(fa), io::encode_frame(fb));
            assert_eq!(fa, fb);
        }
    }

    #[test]
    fn content_seed_controls_shape() {
        let p = PlumeParams::water_mist();
        let a = sample_sequence(&GeneratorLatents::new(1, 5, 1), &p).unwrap();
        let b = sample_sequence(&GeneratorLatents::new(2, 5, 1), &p).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn first_frame_is_centered() {
        let s = sample_sequence(&latents(2), &PlumeParams::water_mist()).unwrap();
        assert!(s.frames()[0].centroid().unwrap().norm() < 1e-12);
    }

    #[test]
    fn meta_parsing() {
        let m = RolidMeta::parse("kind=smoke\npressure_mpa=0.45\ndistance_m=2\n", Path::new("m")).unwrap();
        assert_eq!(m.kind, ObjectKind::Smoke);
        assert_eq!(m.pressure_mpa, Some(0.45));
        assert!(RolidMeta::parse("pressure_mpa=0.45", Path::new("m")).is_err());
        assert!(RolidMeta::parse("kind=fog", Path::new("m")).is_err());
        assert!(RolidMeta::parse("kind=smoke\ndistance_m=far", Path::new("m")).is_err());
    }

    #[test]
    fn report_self_comparison_is_zero() {
        let s = sample_sequence(&latents(3), &PlumeParams::water_mist()).unwrap();
        let r = realism_report(&s, &s).unwrap();
        assert!(r.rows.iter().all(|&(h, c)| h == 0.0 && c == 0.0));
    }

    #[test]
    fn report_single_points() {
        let one = |x: f64| PointCloud::new("p", vec![Point::xyz(x, 0.0, 0.0)]).unwrap();
        let a = SequenceSample::new(vec![one(0.0)], ObjectKind::WaterMist).unwrap();
        let b = SequenceSample::new(vec![one(2.0)], ObjectKind::WaterMist).unwrap();
        let r = realism_report(&a, &b).unwrap();
        assert_eq!(r.rows, vec![(2.0, 2.0)]);
    }

    #[test]
    fn report_rejects_length_mismatch() {
        let s3 = sample_sequence(&latents(3), &PlumeParams::water_mist()).unwrap();
        let s2 = sample_sequence(&latents(2), &PlumeParams::water_mist()).unwrap();
        assert!(matches!(realism_report(&s3, &s2), Err(Error::FrameCountMismatch { .. })));
    }

    #[test]
    fn report_table_format() {
        // Reported water-mist row of the trained sequence model.
        let r = RealismReport { rows: vec![(0.38, 0.02)] };
        assert_eq!(r.to_csv(), "frame,hausdorff,chamfer\n0,0.3800,0.0200\nmean,0.3800,0.0200\n");
    }
}
