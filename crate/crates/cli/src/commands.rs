use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use mistfuse::eval::{sweep, FileProvider, MockProvider, SweepGrid, SweepResult, Thresholds};
use mistfuse::fusion::{fuse, render_scene};
use mistfuse::io::{read_frame, write_frame};
use mistfuse::objectgen::{sample_sequence, write_rolid, GeneratorLatents, ObjectKind, PlumeParams, RolidMeta};
use mistfuse::rangesim::{fit_laser_model, roundtrip_loss, scan_unfold, LaserModel, MIN_RANGE};
use mistfuse::{Error, PointCloud};

use crate::manifest::RunManifest;

/// Source of detections for scoring.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    Mock,
    /// Interchange files under `<dir>/baseline` and per-cell directories.
    Files(PathBuf),
}

/// Unfolds each frame into rings and fits one model to all of them.
pub fn cmd_fit(frames: &[PathBuf], out: &Path, azimuth_bins: usize) -> Result<LaserModel> {
    let mut points = Vec::new();
    let mut rings = Vec::new();
    let mut ring_count = None;
    for path in frames {
        let cloud = read_frame(path)?.retain_min_range(MIN_RANGE);
        let unfolded = scan_unfold(&cloud)?;
        if *ring_count.get_or_insert(unfolded.ring_count) != unfolded.ring_count {
            bail!("{}: {} rings, earlier frames had {}", path.display(), unfolded.ring_count, ring_count.unwrap());
        }
        rings.extend_from_slice(unfolded.cloud.rings().expect("unfolded clouds carry rings"));
        points.extend(unfolded.cloud.into_points());
    }
    let cloud = PointCloud::new("fit", points)?.with_rings(rings)?;
    let model = fit_laser_model(&cloud, azimuth_bins)?;
    model.write(out)?;
    Ok(model)
}

pub fn cmd_gen(kind: ObjectKind, frames: usize, points: Option<usize>, seed: u64, out: &Path) -> Result<()> {
    let mut params = PlumeParams::for_kind(kind);
    if let Some(n) = points {
        params.point_count = n;
    }
    let sample = sample_sequence(&GeneratorLatents::from_seed(seed, frames), &params)?;
    let meta = RolidMeta {
        kind,
        pressure_mpa: None,
        distance_m: None,
    };
    write_rolid(out, &sample, &meta)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuseSummary {
    pub written: usize,
    pub skipped: usize,
}

const PROVENANCE_HEADER: &str = "frame,k,status,placed_points,gated_points,object_points_rendered,scene_points_rendered";

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// Writes `fused/<frame>_<k>.bin`, `rendered/<frame>.bin` and
/// `provenance.csv` under the output directory. Frames where the mode is
/// infeasible are logged and skipped.
pub fn cmd_fuse(manifest: &RunManifest) -> Result<FuseSummary> {
    let scenes = manifest.load_scenes()?;
    let objects = manifest.load_objects()?;
    let out = &manifest.output_dir;
    create_dir(&out.join("fused"))?;
    create_dir(&out.join("rendered"))?;
    let mut log = String::from(PROVENANCE_HEADER);
    log.push('\n');
    let mut summary = FuseSummary { written: 0, skipped: 0 };
    for scene in &scenes {
        let id = scene.frame_id();
        let rendered = render_scene(&scene.scene, &manifest.model)?;
        write_frame(out.join("rendered").join(format!("{id}.bin")), &rendered.cloud)?;
        match fuse(&scene.scene, &scene.target, &objects, &manifest.config, &manifest.model) {
            Ok(frames) => {
                for f in frames {
                    write_frame(out.join("fused").join(format!("{}.bin", scene.fused_id(f.frame_index))), &f.cloud)?;
                    let objects_rendered = f.object_point_count();
                    writeln!(
                        log,
                        "{id},{},ok,{},{},{},{}",
                        f.frame_index,
                        f.placed_points,
                        f.gated_points,
                        objects_rendered,
                        f.cloud.len() - objects_rendered
                    )?;
                    summary.written += 1;
                }
            }
            Err(Error::InfeasibleMode { mode, reason }) => {
                eprintln!("{id}: skipped, {mode} infeasible: {reason}");
                writeln!(log, "{id},,infeasible,,,,")?;
                summary.skipped += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let path = out.join("provenance.csv");
    fs::write(&path, log).with_context(|| format!("writing {}", path.display()))?;
    Ok(summary)
}

fn score(manifest: &RunManifest, grid: &SweepGrid, detector: &Detector, fused_subdir: Option<&str>, report: &str) -> Result<SweepResult> {
    let scenes = manifest.load_scenes()?;
    let objects = manifest.load_objects()?;
    let th = Thresholds::default();
    let result = match detector {
        Detector::Mock => sweep(&scenes, &objects, &manifest.model, grid, &MockProvider(manifest.mock), &th)?,
        Detector::Files(dir) => {
            let provider = match fused_subdir {
                Some(sub) => FileProvider::fixed(dir, sub),
                None => FileProvider::per_cell(dir),
            };
            let result = sweep(&scenes, &objects, &manifest.model, grid, &provider, &th);
            for w in provider.take_warnings() {
                eprintln!("warning: {w}");
            }
            result?
        }
    };
    create_dir(&manifest.output_dir)?;
    let path = manifest.output_dir.join(report);
    fs::write(&path, result.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    Ok(result)
}

/// Scores the manifest's single fusion config. File detections for fused
/// frames are read from `<dir>/fused`.
pub fn cmd_eval(manifest: &RunManifest, detector: &Detector) -> Result<SweepResult> {
    score(manifest, &SweepGrid::single(&manifest.config), detector, Some("fused"), "eval.csv")
}

/// Scores every cell of the manifest grid. File detections for fused frames
/// are read from `<dir>/<cell tag>`.
pub fn cmd_sweep(manifest: &RunManifest, detector: &Detector) -> Result<SweepResult> {
    score(manifest, &manifest.grid, detector, None, "sweep.csv")
}

/// CSV of round-trip losses under the model and under its shared-origin
/// variant.
pub fn cmd_roundtrip_audit(frames: &[PathBuf], model: Option<&Path>) -> Result<String> {
    let model = match model {
        Some(p) => LaserModel::read(p)?,
        None => LaserModel::kitti_like(),
    };
    let naive = model.with_corrected_backprojection(false);
    let mut out = String::from("frame,points,lost,lost_fraction,dropped,shared_origin_lost,shared_origin_lost_fraction\n");
    for path in frames {
        let cloud = read_frame(path)?.retain_min_range(MIN_RANGE);
        let loss = roundtrip_loss(&cloud, &model)?;
        let base = roundtrip_loss(&cloud, &naive)?;
        writeln!(
            out,
            "{},{},{},{:.6},{},{},{:.6}",
            cloud.frame_id(),
            cloud.len(),
            loss.lost_count,
            loss.lost_fraction,
            loss.dropped,
            base.lost_count,
            base.lost_fraction
        )?;
    }
    Ok(out)
}
