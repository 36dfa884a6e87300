mod common;

use mistfuse::eval::{
    attack_success, iou3d, match_vehicles, sweep, AttackOutcome, Detection, DetectionSet, FileProvider,
    MockDetector, MockProvider, SceneFrame, Stage, SweepCell, SweepGrid, Thresholds, CSV_HEADER,
};
use mistfuse::fusion::{fuse, render_scene, FusionConfig, FusionMode};
use mistfuse::{BoundingBox3D, Error};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn car(x: f64, y: f64) -> BoundingBox3D {
    BoundingBox3D::new([x, y, -0.9], [4.0, 1.8, 1.5], 0.0, "Car").unwrap()
}

fn det(b: BoundingBox3D, conf: f64) -> Detection {
    Detection::new(b, conf).unwrap()
}

fn jitter(b: &BoundingBox3D, dx: f64, dyaw: f64) -> BoundingBox3D {
    let c = b.center();
    BoundingBox3D::new([c.x + dx, c.y, c.z], b.dims().into(), b.yaw() + dyaw, b.label()).unwrap()
}

/// Vehicles spaced so that no detection can overlap two of them.
fn spaced_vehicles() -> Vec<BoundingBox3D> {
    (0..10).map(|i| car(10.0 + 8.0 * i as f64, if i % 2 == 0 { 3.0 } else { -3.0 })).collect()
}

fn per_vehicle_oracle(dets: &[Detection], gt: &[BoundingBox3D], th: &Thresholds) -> Vec<bool> {
    gt.iter()
        .map(|g| dets.iter().any(|d| d.is_vehicle() && d.confidence > th.confidence && iou3d(&d.bbox, g) > th.iou))
        .collect()
}

#[test]
fn ten_vehicle_fixture_matches_enumeration() {
    let gt = spaced_vehicles();
    let th = Thresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let make = |rng: &mut ChaCha8Rng| -> Vec<Detection> {
            gt.iter()
                .flat_map(|g| {
                    let n = rng.random_range(0..3);
                    (0..n)
                        .map(|_| det(jitter(g, rng.random_range(-1.2..1.2), rng.random_range(-0.3..0.3)), rng.random_range(0.3..1.0)))
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        let base = make(&mut rng);
        let adv = make(&mut rng);
        let out = attack_success(&DetectionSet::new("f", "t", base.clone()), &DetectionSet::new("f_0", "t", adv.clone()), &gt, &th).unwrap();
        let before = per_vehicle_oracle(&base, &gt, &th);
        let after = per_vehicle_oracle(&adv, &gt, &th);
        let detected = before.iter().filter(|&&b| b).count();
        let successes = before.iter().zip(&after).filter(|(&b, &a)| b && !a).count();
        assert_eq!((out.detected, out.successes), (detected, successes));
    }
}

proptest! {
    #[test]
    fn permutation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Overlapping vehicles make matching order matter.
        let gt = vec![car(10.0, 0.0), car(10.6, 0.0), car(11.2, 0.1), car(20.0, 3.0)];
        let dets: Vec<Detection> = (0..8)
            .map(|_| {
                let g = &gt[rng.random_range(0..gt.len())];
                det(jitter(g, rng.random_range(-0.8..0.8), rng.random_range(-0.2..0.2)), [0.6, 0.8, 0.9][rng.random_range(0..3)])
            })
            .collect();
        let th = Thresholds::default();
        let reference = match_vehicles(&dets, &gt, &th);
        for _ in 0..5 {
            let mut shuffled = dets.clone();
            shuffled.shuffle(&mut rng);
            prop_assert_eq!(&match_vehicles(&shuffled, &gt, &th), &reference);
        }
    }

    #[test]
    fn pooled_rate_is_weighted_mean(a in (0usize..20, 0usize..20), b in (1usize..20, 0usize..20)) {
        let mk = |(d, s): (usize, usize)| AttackOutcome { vehicles: vec![], detected: d, successes: s.min(d) };
        let (x, y) = (mk(a), mk(b));
        let mut pooled = x.clone();
        pooled.merge(&y);
        let weighted = (x.asr().unwrap_or(0.0) * x.detected as f64 + y.asr().unwrap() * y.detected as f64)
            / (x.detected + y.detected) as f64;
        prop_assert!((pooled.asr().unwrap() - weighted).abs() < 1e-12);
    }
}

#[test]
fn undefined_rate_is_explicit() {
    let out = attack_success(&DetectionSet::new("f", "t", vec![]), &DetectionSet::new("f", "t", vec![]), &[car(10.0, 0.0)], &Thresholds::default()).unwrap();
    assert_eq!(out.asr(), None);
}

fn fixture(frames: usize) -> (mistfuse::rangesim::LaserModel, Vec<SceneFrame>, Vec<mistfuse::PointCloud>) {
    let m = common::model();
    let scenes = (0..frames as u64).map(|s| common::scene(&m, 100 + s)).collect();
    (m, scenes, common::mist(9, 3, 20_000))
}

#[test]
fn singleton_sweep_equals_direct_scoring() {
    let (m, scenes, objects) = fixture(3);
    let mock = MockDetector::new(40, 0.1);
    let cfg = FusionConfig::new(FusionMode::HeadTailSide, 0.5, 0.5, 0.0).unwrap();
    let result = sweep(&scenes, &objects, &m, &SweepGrid::single(&cfg), &MockProvider(mock), &Thresholds::default()).unwrap();
    assert_eq!(result.rows.len(), 1);

    let mut direct = AttackOutcome::default();
    let mut frames = 0;
    for s in &scenes {
        let Ok(fused) = fuse(&s.scene, &s.target, &objects, &cfg, &m) else { continue };
        let base = mock.detect(s.frame_id(), &render_scene(&s.scene, &m).unwrap().scene_points(), &s.vehicles);
        for f in fused {
            let adv = mock.detect(&s.fused_id(f.frame_index), &f.scene_points(), &s.vehicles);
            direct.merge(&attack_success(&base, &adv, std::slice::from_ref(&s.target), &Thresholds::default()).unwrap());
            frames += 1;
        }
    }
    let row = &result.rows[0];
    assert_eq!((row.frames, row.detected, row.successes), (frames, direct.detected, direct.successes));
    assert_eq!(row.asr(), direct.asr());
}

#[test]
fn file_provider_reads_interchange_and_reports_missing() {
    let (m, scenes, objects) = fixture(2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = FusionConfig::new(FusionMode::HeadTailSide, 0.5, 0.5, 0.0).unwrap();
    let cell = SweepCell::from(cfg);
    let provider = FileProvider::per_cell(dir.path());
    // Write what the mock would see, so both providers must agree.
    let mock = MockProvider(MockDetector::new(40, 0.1));
    std::fs::create_dir_all(dir.path().join("baseline")).unwrap();
    std::fs::create_dir_all(dir.path().join(cell.tag())).unwrap();
    for s in &scenes {
        let base = mistfuse::eval::DetectionProvider::detect(&mock, s, Stage::Baseline, Some(&render_scene(&s.scene, &m).unwrap())).unwrap();
        base.write(provider.path_for(s, Stage::Baseline).0).unwrap();
        for f in fuse(&s.scene, &s.target, &objects, &cfg, &m).unwrap() {
            let stage = Stage::Fused { cell: &cell, k: f.frame_index };
            let adv = mistfuse::eval::DetectionProvider::detect(&mock, s, stage, Some(&f)).unwrap();
            adv.write(provider.path_for(s, stage).0).unwrap();
        }
    }
    let grid = SweepGrid::single(&cfg);
    let from_files = sweep(&scenes, &objects, &m, &grid, &provider, &Thresholds::default()).unwrap();
    let from_mock = sweep(&scenes, &objects, &m, &grid, &mock, &Thresholds::default()).unwrap();
    assert_eq!(from_files, from_mock);
    assert!(provider.take_warnings().is_empty());

    let missing = format!("{}_2", scenes[1].frame_id());
    std::fs::remove_file(provider.path_for(&scenes[1], Stage::Fused { cell: &cell, k: 2 }).0).unwrap();
    match sweep(&scenes, &objects, &m, &grid, &provider, &Thresholds::default()) {
        Err(Error::MissingDetections { frame_id }) => assert_eq!(frame_id, missing),
        other => panic!("expected missing detections, got {other:?}"),
    }
}

#[test]
fn csv_layout_and_argmax() {
    let (m, scenes, objects) = fixture(2);
    let grid = SweepGrid::new(vec![FusionMode::HeadTailSide, FusionMode::BodySide], vec![0.0, 0.5], vec![0.5], vec![0.0]).unwrap();
    let result = sweep(&scenes, &objects, &m, &grid, &MockProvider(MockDetector::new(40, 0.1)), &Thresholds::default()).unwrap();
    let csv = result.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("head_tail_side,0,0.5,0,"));
    assert!(lines[4].starts_with("body_side,0.5,0.5,0,"));
    if let Some(i) = result.argmax() {
        let best = result.rows[i].asr().unwrap();
        assert!(result.rows.iter().all(|r| r.asr().is_none_or(|a| a <= best)));
    }
    assert!(SweepGrid::new(vec![], vec![0.1], vec![0.1], vec![0.0]).is_err());
}
