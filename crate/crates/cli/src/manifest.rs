//! Run manifests: a TOML file naming the dataset, frames, fusion config,
//! seed and output directory. Relative paths resolve against the
//! manifest's own directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use mistfuse::eval::{MockDetector, SceneFrame, SweepGrid};
use mistfuse::fusion::{FusionConfig, FusionMode};
use mistfuse::io::{read_frame, read_labels};
use mistfuse::objectgen::{load_rolid, sample_sequence, GeneratorLatents, ObjectKind, PlumeParams, DEFAULT_FRAMES};
use mistfuse::rangesim::{LaserModel, MIN_RANGE};
use mistfuse::PointCloud;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectsSection {
    rolid: Option<PathBuf>,
    kind: Option<String>,
    frames: Option<usize>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MockSection {
    min_points: Option<usize>,
    margin: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    modes: Option<Vec<String>>,
    d_h: Option<Vec<f64>>,
    d_v: Option<Vec<f64>>,
    angles: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    dataset_root: PathBuf,
    frames: Vec<String>,
    config: PathBuf,
    seed: u64,
    output_dir: PathBuf,
    model: Option<PathBuf>,
    #[serde(default)]
    objects: ObjectsSection,
    #[serde(default)]
    mock: MockSection,
    #[serde(default)]
    sweep: SweepSection,
}

/// Where the object sequence comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectSource {
    Recorded(PathBuf),
    Generated { kind: ObjectKind, frames: usize, points: Option<usize> },
}

/// Command-line values that replace manifest settings.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<FusionMode>,
    pub d_h: Option<f64>,
    pub d_v: Option<f64>,
    pub angle: Option<f64>,
    pub seed: Option<u64>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub dataset_root: PathBuf,
    pub frames: Vec<String>,
    pub config: FusionConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub model: LaserModel,
    pub objects: ObjectSource,
    pub mock: MockDetector,
    pub grid: SweepGrid,
}

fn require(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        bail!("{what} not found: {}", path.display());
    }
    Ok(())
}

fn parse_modes(names: &[String]) -> Result<Vec<FusionMode>> {
    names.iter().map(|n| n.parse().map_err(anyhow::Error::from)).collect()
}

impl RunManifest {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let file: ManifestFile = toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| base.join(p);

        let dataset_root = resolve(&file.dataset_root);
        if file.frames.is_empty() {
            bail!("manifest lists no frames");
        }
        for f in &file.frames {
            require(&frame_path(&dataset_root, f), "frame")?;
            require(&label_path(&dataset_root, f), "label file")?;
        }
        let config_path = resolve(&file.config);
        require(&config_path, "fusion config")?;
        let mut config = FusionConfig::read(&config_path)?;
        config.mode = overrides.mode.unwrap_or(config.mode);
        config.d_h = overrides.d_h.unwrap_or(config.d_h);
        config.d_v = overrides.d_v.unwrap_or(config.d_v);
        config.spray_angle_deg = overrides.angle.unwrap_or(config.spray_angle_deg);
        config.validate()?;

        let model_path = overrides.model.clone().or_else(|| file.model.as_deref().map(resolve));
        let model = match model_path {
            Some(p) => {
                require(&p, "laser model")?;
                LaserModel::read(&p)?
            }
            None => LaserModel::kitti_like(),
        };

        let objects = match (&file.objects.rolid, &file.objects.kind) {
            (Some(dir), None) => {
                let dir = resolve(dir);
                require(&dir, "object recording")?;
                ObjectSource::Recorded(dir)
            }
            (None, kind) => ObjectSource::Generated {
                kind: kind.as_deref().unwrap_or("water_mist").parse()?,
                frames: file.objects.frames.unwrap_or(DEFAULT_FRAMES),
                points: file.objects.points,
            },
            (Some(_), Some(_)) => bail!("objects: give either rolid or kind, not both"),
        };

        let defaults = MockDetector::default();
        let mock = MockDetector::new(
            file.mock.min_points.unwrap_or(defaults.min_points),
            file.mock.margin.unwrap_or(defaults.margin),
        );

        let s = &file.sweep;
        let grid = SweepGrid::new(
            match (overrides.mode, &s.modes) {
                (None, Some(m)) => parse_modes(m)?,
                _ => vec![config.mode],
            },
            match (overrides.d_h, &s.d_h) {
                (None, Some(v)) => v.clone(),
                _ => vec![config.d_h],
            },
            match (overrides.d_v, &s.d_v) {
                (None, Some(v)) => v.clone(),
                _ => vec![config.d_v],
            },
            match (overrides.angle, &s.angles) {
                (None, Some(v)) => v.clone(),
                _ => vec![config.spray_angle_deg],
            },
        )?;

        Ok(Self {
            dataset_root,
            frames: file.frames,
            config,
            seed: overrides.seed.unwrap_or(file.seed),
            output_dir: resolve(&file.output_dir),
            model,
            objects,
            mock,
            grid,
        })
    }

    /// Scenes with their labels; points inside the minimum range are dropped.
    pub fn load_scenes(&self) -> Result<Vec<SceneFrame>> {
        self.frames
            .iter()
            .map(|f| {
                let cloud = read_frame(frame_path(&self.dataset_root, f))?.retain_min_range(MIN_RANGE);
                let labels = read_labels(label_path(&self.dataset_root, f))?;
                Ok(SceneFrame::new(cloud, &labels)?)
            })
            .collect()
    }

    pub fn load_objects(&self) -> Result<Vec<PointCloud>> {
        let sample = match &self.objects {
            ObjectSource::Recorded(dir) => load_rolid(dir)?.0,
            ObjectSource::Generated { kind, frames, points } => {
                let mut params = PlumeParams::for_kind(*kind);
                if let Some(n) = points {
                    params.point_count = *n;
                }
                sample_sequence(&GeneratorLatents::from_seed(self.seed, *frames), &params)?
            }
        };
        Ok(sample.frames().to_vec())
    }
}

pub fn frame_path(root: &Path, frame: &str) -> PathBuf {
    root.join("velodyne").join(format!("{frame}.bin"))
}

pub fn label_path(root: &Path, frame: &str) -> PathBuf {
    root.join("label").join(format!("{frame}.txt"))
}
