#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mistfuse::io::{write_frame, write_labels};
use mistfuse::rangesim::LaserModel;
use mistfuse::synth::{raycast, street, SceneSpec};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mistfuse"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn mistfuse")
}

/// 32 rings with per-ring height offsets, 1024 columns.
pub fn model() -> LaserModel {
    let base = LaserModel::uniform(32, 2f64.to_radians(), (-24.8f64).to_radians(), 1024).unwrap();
    let heights: Vec<f64> = (0..32).map(|i| 0.004 * i as f64 - 0.05).collect();
    base.with_heights(&heights).unwrap()
}

pub struct Dataset {
    pub dir: PathBuf,
    pub frames: Vec<String>,
}

/// Ray-cast street scenes stored as `velodyne/<id>.bin` + `label/<id>.txt`.
pub fn write_dataset(dir: &Path, model: &LaserModel, seeds: &[u64]) -> Dataset {
    std::fs::create_dir_all(dir.join("velodyne")).unwrap();
    std::fs::create_dir_all(dir.join("label")).unwrap();
    let mut frames = Vec::new();
    for &seed in seeds {
        let id = format!("{seed:06}");
        let boxes = street(seed, 2);
        let cloud = raycast(model, &SceneSpec::new(boxes.clone()), &id);
        write_frame(dir.join("velodyne").join(format!("{id}.bin")), &cloud).unwrap();
        write_labels(dir.join("label").join(format!("{id}.txt")), &boxes).unwrap();
        frames.push(id);
    }
    Dataset { dir: dir.to_path_buf(), frames }
}

pub struct ManifestSpec<'a> {
    pub config: &'a str,
    pub seed: u64,
    pub object_points: usize,
    pub mock_min_points: usize,
    pub sweep: &'a str,
}

impl Default for ManifestSpec<'_> {
    fn default() -> Self {
        Self {
            config: "mode = \"head_tail_side\"\nd_h = 0.5\nd_v = 0.5\nspray_angle_deg = 0\n",
            seed: 7,
            object_points: 4096,
            mock_min_points: 150,
            sweep: "",
        }
    }
}

/// Writes `model.toml`, `fusion.cfg` and `run.toml` into `root`.
pub fn write_manifest(root: &Path, data: &Dataset, model: &LaserModel, spec: &ManifestSpec) -> PathBuf {
    model.write(root.join("model.toml")).unwrap();
    std::fs::write(root.join("fusion.cfg"), spec.config).unwrap();
    let frames: Vec<String> = data.frames.iter().map(|f| format!("\"{f}\"")).collect();
    let text = format!(
        "dataset_root = \"{}\"\nframes = [{}]\nconfig = \"fusion.cfg\"\nseed = {}\noutput_dir = \"out\"\nmodel = \"model.toml\"\n\n[objects]\nkind = \"water_mist\"\nframes = 3\npoints = {}\n\n[mock]\nmin_points = {}\n\n{}",
        data.dir.strip_prefix(root).unwrap_or(&data.dir).display(),
        frames.join(", "),
        spec.seed,
        spec.object_points,
        spec.mock_min_points,
        spec.sweep
    );
    let path = root.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}
