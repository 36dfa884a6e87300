#![allow(dead_code)]

use mistfuse::eval::SceneFrame;
use mistfuse::objectgen::{sample_sequence, GeneratorLatents, PlumeParams};
use mistfuse::rangesim::LaserModel;
use mistfuse::synth::{raycast, street, SceneSpec};
use mistfuse::PointCloud;

/// 32 rings with small per-ring height offsets, 1024 columns.
pub fn model() -> LaserModel {
    let base = LaserModel::uniform(32, 2f64.to_radians(), (-24.8f64).to_radians(), 1024).unwrap();
    let heights: Vec<f64> = (0..32).map(|i| 0.004 * i as f64 - 0.05).collect();
    base.with_heights(&heights).unwrap()
}

pub fn scene(model: &LaserModel, seed: u64) -> SceneFrame {
    let boxes = street(seed, 2);
    let cloud = raycast(model, &SceneSpec::new(boxes.clone()), &format!("{seed:06}"));
    SceneFrame::new(cloud, &boxes).unwrap()
}

pub fn mist(seed: u64, frames: usize, points: usize) -> Vec<PointCloud> {
    let params = PlumeParams {
        point_count: points,
        ..PlumeParams::water_mist()
    };
    sample_sequence(&GeneratorLatents::from_seed(seed, frames), &params)
        .unwrap()
        .frames()
        .to_vec()
}
