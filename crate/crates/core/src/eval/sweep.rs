use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Mutex;

use nalgebra::Vector3;

use crate::cloud::{BoundingBox3D, PointCloud};
use crate::error::{Error, Result};
use crate::fusion::{
    check_angle, check_density, fuse_prepared, prepare_copies, render_scene, select_anchor, FusedFrame, FusionConfig,
    FusionMode,
};
use crate::par;
use crate::rangesim::LaserModel;

use super::asr::{attack_success, AttackOutcome, Thresholds};
use super::detection::{is_vehicle_class, DetectionSet};
use super::mock::MockDetector;

/// A scene with its target vehicle and every labelled vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFrame {
    pub scene: PointCloud,
    pub target: BoundingBox3D,
    pub vehicles: Vec<BoundingBox3D>,
}

impl SceneFrame {
    /// Uses the vehicle box nearest the sensor as the target.
    pub fn new(scene: PointCloud, labels: &[BoundingBox3D]) -> Result<Self> {
        let vehicles: Vec<BoundingBox3D> = labels.iter().filter(|b| is_vehicle_class(b.label())).cloned().collect();
        let target = vehicles
            .iter()
            .min_by(|a, b| a.center().xy().norm().total_cmp(&b.center().xy().norm()))
            .cloned()
            .ok_or_else(|| Error::InvalidBox(format!("frame {:?} has no vehicle box", scene.frame_id())))?;
        Ok(Self {
            scene,
            target,
            vehicles,
        })
    }

    pub fn frame_id(&self) -> &str {
        self.scene.frame_id()
    }

    pub fn fused_id(&self, k: usize) -> String {
        format!("{}_{k}", self.frame_id())
    }
}

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub mode: FusionMode,
    pub d_h: f64,
    pub d_v: f64,
    pub angle_deg: f64,
}

impl SweepCell {
    /// Directory-safe name, e.g. `two_sides_dh0.5_dv0.004_a-10`.
    pub fn tag(&self) -> String {
        format!("{}_dh{}_dv{}_a{}", self.mode, self.d_h, self.d_v, self.angle_deg)
    }

    pub fn config(&self) -> FusionConfig {
        FusionConfig {
            mode: self.mode,
            d_h: self.d_h,
            d_v: self.d_v,
            spray_angle_deg: self.angle_deg,
        }
    }
}

impl From<FusionConfig> for SweepCell {
    fn from(c: FusionConfig) -> Self {
        Self {
            mode: c.mode,
            d_h: c.d_h,
            d_v: c.d_v,
            angle_deg: c.spray_angle_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub modes: Vec<FusionMode>,
    pub d_h: Vec<f64>,
    pub d_v: Vec<f64>,
    pub angles_deg: Vec<f64>,
}

impl SweepGrid {
    pub fn new(modes: Vec<FusionMode>, d_h: Vec<f64>, d_v: Vec<f64>, angles_deg: Vec<f64>) -> Result<Self> {
        let grid = Self {
            modes,
            d_h,
            d_v,
            angles_deg,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn single(cfg: &FusionConfig) -> Self {
        Self {
            modes: vec![cfg.mode],
            d_h: vec![cfg.d_h],
            d_v: vec![cfg.d_v],
            angles_deg: vec![cfg.spray_angle_deg],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() || self.d_h.is_empty() || self.d_v.is_empty() || self.angles_deg.is_empty() {
            return Err(Error::InvalidConfig("sweep grid has an empty axis".into()));
        }
        self.d_h.iter().try_for_each(|&d| check_density("d_h", d))?;
        self.d_v.iter().try_for_each(|&d| check_density("d_v", d))?;
        self.angles_deg.iter().try_for_each(|&a| check_angle(a))
    }

    /// Cells in report order: mode, then d_h, d_v, angle.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::with_capacity(self.len());
        for &mode in &self.modes {
            for &d_h in &self.d_h {
                for &d_v in &self.d_v {
                    for &angle_deg in &self.angles_deg {
                        out.push(SweepCell {
                            mode,
                            d_h,
                            d_v,
                            angle_deg,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.modes.len() * self.d_h.len() * self.d_v.len() * self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Which detections a provider is asked for.
#[derive(Debug, Clone, Copy)]
pub enum Stage<'a> {
    Baseline,
    Fused { cell: &'a SweepCell, k: usize },
}

pub trait DetectionProvider: Sync {
    /// Whether [`detect`](Self::detect) needs the rendered clouds. When
    /// false the sweep skips fusion and passes `None`.
    fn needs_clouds(&self) -> bool;

    fn detect(&self, frame: &SceneFrame, stage: Stage<'_>, cloud: Option<&FusedFrame>) -> Result<DetectionSet>;
}

/// Runs [`MockDetector`] on the scene-origin points of each rendered frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider(pub MockDetector);

impl DetectionProvider for MockProvider {
    fn needs_clouds(&self) -> bool {
        true
    }

    fn detect(&self, frame: &SceneFrame, stage: Stage<'_>, cloud: Option<&FusedFrame>) -> Result<DetectionSet> {
        let cloud = cloud.ok_or_else(|| Error::InvalidConfig("mock detector needs rendered clouds".into()))?;
        let id = match stage {
            Stage::Baseline => frame.frame_id().to_string(),
            Stage::Fused { k, .. } => frame.fused_id(k),
        };
        Ok(self.0.detect(&id, &cloud.scene_points(), &frame.vehicles))
    }
}

/// Reads interchange files: `<root>/baseline/<frame>.json` and
/// `<root>/<subdir>/<frame>_<k>.json`, where the subdir is fixed or the
/// cell tag.
#[derive(Debug)]
pub struct FileProvider {
    root: PathBuf,
    fused_subdir: Option<String>,
    warnings: Mutex<Vec<String>>,
}

impl FileProvider {
    /// Fused detections live under one directory per cell tag.
    pub fn per_cell(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            fused_subdir: None,
            warnings: Mutex::new(Vec::new()),
        }
    }

    pub fn fixed(root: impl Into<PathBuf>, subdir: impl Into<String>) -> Self {
        Self {
            fused_subdir: Some(subdir.into()),
            ..Self::per_cell(root)
        }
    }

    pub fn path_for(&self, frame: &SceneFrame, stage: Stage<'_>) -> (PathBuf, String) {
        match stage {
            Stage::Baseline => {
                let id = frame.frame_id().to_string();
                (self.root.join("baseline").join(format!("{id}.json")), id)
            }
            Stage::Fused { cell, k } => {
                let id = frame.fused_id(k);
                let sub = self.fused_subdir.clone().unwrap_or_else(|| cell.tag());
                (self.root.join(sub).join(format!("{id}.json")), id)
            }
        }
    }

    /// Warnings from skipped records, in the order files were read.
    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().expect("warnings lock"))
    }
}

impl DetectionProvider for FileProvider {
    fn needs_clouds(&self) -> bool {
        false
    }

    fn detect(&self, frame: &SceneFrame, stage: Stage<'_>, _cloud: Option<&FusedFrame>) -> Result<DetectionSet> {
        let (path, frame_id) = self.path_for(frame, stage);
        if !path.is_file() {
            return Err(Error::MissingDetections { frame_id });
        }
        let (set, warnings) = DetectionSet::read(&path)?;
        if !warnings.is_empty() {
            let mut w = self.warnings.lock().expect("warnings lock");
            w.extend(warnings.into_iter().map(|m| format!("{}: {m}", path.display())));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: SweepCell,
    /// Fused frames scored.
    pub frames: usize,
    /// Scene frames skipped because the mode was infeasible.
    pub infeasible: usize,
    pub detected: usize,
    pub successes: usize,
}

impl CellResult {
    pub fn asr(&self) -> Option<f64> {
        (self.detected > 0).then(|| self.successes as f64 / self.detected as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<CellResult>,
}

pub const CSV_HEADER: &str = "mode,d_h,d_v,angle_deg,frames,detected,successes,asr";

impl SweepResult {
    /// Index of the first row with the highest defined ASR.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(a) = r.asr() {
                if best.is_none_or(|(_, b)| a > b) {
                    best = Some((i, a));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Undefined rates are written as an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let c = &r.cell;
            let asr = r.asr().map(|a| format!("{a:.6}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.mode, c.d_h, c.d_v, c.angle_deg, r.frames, r.detected, r.successes, asr
            )
            .expect("write to String");
        }
        out
    }
}

struct SceneCells {
    infeasible: bool,
    frames: usize,
    outcomes: Vec<AttackOutcome>,
}

fn is_infeasible(e: &Error) -> bool {
    matches!(e, Error::InfeasibleMode { .. })
}

fn score_scene(
    frame: &SceneFrame,
    baseline: &DetectionSet,
    objects: &[PointCloud],
    cells: &[SweepCell],
    model: &LaserModel,
    provider: &dyn DetectionProvider,
    th: &Thresholds,
) -> Result<SceneCells> {
    let (mode, angle) = (cells[0].mode, cells[0].angle_deg);
    let anchors = match select_anchor(&frame.target, &Vector3::zeros(), mode) {
        Ok(a) => a,
        Err(e) if is_infeasible(&e) => {
            return Ok(SceneCells {
                infeasible: true,
                frames: 0,
                outcomes: vec![AttackOutcome::default(); cells.len()],
            })
        }
        Err(e) => return Err(e),
    };
    let copies = if provider.needs_clouds() {
        objects
            .iter()
            .map(|o| prepare_copies(o, &anchors, angle, model))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![Vec::new(); objects.len()]
    };
    let target = std::slice::from_ref(&frame.target);
    let mut outcomes = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut pooled = AttackOutcome::default();
        for (k, prepared) in copies.iter().enumerate() {
            let fused = if provider.needs_clouds() {
                let mut f = fuse_prepared(&frame.scene, prepared, cell.d_h, cell.d_v, model)?;
                f.frame_index = k;
                Some(f)
            } else {
                None
            };
            let adv = provider.detect(frame, Stage::Fused { cell, k }, fused.as_ref())?;
            pooled.merge(&attack_success(baseline, &adv, target, th)?);
        }
        outcomes.push(pooled);
    }
    Ok(SceneCells {
        infeasible: false,
        frames: objects.len(),
        outcomes,
    })
}

/// Scores every grid cell: fuse each scene with each object frame, detect,
/// and pool attack outcomes over the target vehicles. Scenes where a mode
/// is infeasible are skipped for that mode.
pub fn sweep(
    frames: &[SceneFrame],
    objects: &[PointCloud],
    model: &LaserModel,
    grid: &SweepGrid,
    provider: &dyn DetectionProvider,
    th: &Thresholds,
) -> Result<SweepResult> {
    grid.validate()?;
    if objects.is_empty() {
        return Err(Error::InvalidGenerator("no object frames".into()));
    }
    let baselines = par::try_map(frames, |f| {
        let rendered = if provider.needs_clouds() {
            Some(render_scene(&f.scene, model)?)
        } else {
            None
        };
        provider.detect(f, Stage::Baseline, rendered.as_ref())
    })?;
    let indexed: Vec<usize> = (0..frames.len()).collect();

    let mut results: HashMap<(usize, usize, usize, usize), CellResult> = HashMap::new();
    for (mi, &mode) in grid.modes.iter().enumerate() {
        for (ai, &angle_deg) in grid.angles_deg.iter().enumerate() {
            let mut keys = Vec::new();
            let mut cells = Vec::new();
            for (hi, &d_h) in grid.d_h.iter().enumerate() {
                for (vi, &d_v) in grid.d_v.iter().enumerate() {
                    keys.push((mi, hi, vi, ai));
                    cells.push(SweepCell {
                        mode,
                        d_h,
                        d_v,
                        angle_deg,
                    });
                }
            }
            let per_scene = par::try_map(&indexed, |&i| {
                score_scene(&frames[i], &baselines[i], objects, &cells, model, provider, th)
            })?;
            for (c, (key, cell)) in keys.into_iter().zip(&cells).enumerate() {
                let mut row = CellResult {
                    cell: *cell,
                    frames: 0,
                    infeasible: 0,
                    detected: 0,
                    successes: 0,
                };
                for s in &per_scene {
                    row.frames += s.frames;
                    row.infeasible += s.infeasible as usize;
                    row.detected += s.outcomes[c].detected;
                    row.successes += s.outcomes[c].successes;
                }
                results.insert(key, row);
            }
        }
    }

    let mut rows = Vec::with_capacity(grid.len());
    for mi in 0..grid.modes.len() {
        for hi in 0..grid.d_h.len() {
            for vi in 0..grid.d_v.len() {
                for ai in 0..grid.angles_deg.len() {
                    rows.push(results.remove(&(mi, hi, vi, ai)).expect("every cell scored"));
                }
            }
        }
    }
    Ok(SweepResult { rows })
}
