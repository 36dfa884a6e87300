use std::cmp::Ordering;

use crate::cloud::BoundingBox3D;
use crate::error::{Error, Result};

use super::detection::{Detection, DetectionSet};
use super::iou::iou3d;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// A detection counts only if its confidence exceeds this.
    pub confidence: f64,
    /// A match requires IoU strictly above this.
    pub iou: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            confidence: 0.5,
            iou: 0.7,
        }
    }
}

fn box_key(d: &Detection) -> [f64; 7] {
    let c = d.bbox.center();
    [c.x, c.y, c.z, d.bbox.length(), d.bbox.width(), d.bbox.height(), d.bbox.yaw()]
}

fn by_confidence(a: &&Detection, b: &&Detection) -> Ordering {
    b.confidence.total_cmp(&a.confidence).then_with(|| {
        box_key(a)
            .iter()
            .zip(box_key(b).iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Greedy one-to-one matching in descending confidence: each qualifying
/// vehicle detection claims the unclaimed box with the highest IoU above
/// the threshold. Returns which of `gt` were matched.
pub fn match_vehicles(detections: &[Detection], gt: &[BoundingBox3D], th: &Thresholds) -> Vec<bool> {
    let mut candidates: Vec<&Detection> = detections
        .iter()
        .filter(|d| d.is_vehicle() && d.confidence > th.confidence)
        .collect();
    candidates.sort_by(by_confidence);
    let mut matched = vec![false; gt.len()];
    for d in candidates {
        let mut best: Option<(usize, f64)> = None;
        for (g, bx) in gt.iter().enumerate() {
            if matched[g] {
                continue;
            }
            let iou = iou3d(&d.bbox, bx);
            if iou > th.iou && best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        if let Some((g, _)) = best {
            matched[g] = true;
        }
    }
    matched
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VehicleOutcome {
    /// Missed before the perturbation; excluded from the rate.
    NotDetected,
    /// Still detected after the perturbation.
    Survived,
    /// Detected before, missed after.
    Attacked,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttackOutcome {
    pub vehicles: Vec<VehicleOutcome>,
    pub detected: usize,
    pub successes: usize,
}

impl AttackOutcome {
    /// `None` when no vehicle was detected before the perturbation.
    pub fn asr(&self) -> Option<f64> {
        (self.detected > 0).then(|| self.successes as f64 / self.detected as f64)
    }

    /// Pools two outcomes; the rate becomes the detected-weighted mean.
    pub fn merge(&mut self, other: &AttackOutcome) {
        self.vehicles.extend_from_slice(&other.vehicles);
        self.detected += other.detected;
        self.successes += other.successes;
    }
}

fn same_frame(baseline: &str, adversarial: &str) -> bool {
    adversarial == baseline
        || adversarial
            .strip_prefix(baseline)
            .and_then(|rest| rest.strip_prefix('_'))
            .is_some_and(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()))
}

/// Scores one frame. The adversarial frame id must equal the baseline id
/// or extend it with `_<k>`.
pub fn attack_success(
    baseline: &DetectionSet,
    adversarial: &DetectionSet,
    gt: &[BoundingBox3D],
    th: &Thresholds,
) -> Result<AttackOutcome> {
    if !same_frame(&baseline.frame_id, &adversarial.frame_id) {
        return Err(Error::FrameSetMismatch(format!(
            "baseline {:?} vs adversarial {:?}",
            baseline.frame_id, adversarial.frame_id
        )));
    }
    let before = match_vehicles(&baseline.detections, gt, th);
    let after = match_vehicles(&adversarial.detections, gt, th);
    let mut out = AttackOutcome::default();
    for (b, a) in before.into_iter().zip(after) {
        let v = match (b, a) {
            (false, _) => VehicleOutcome::NotDetected,
            (true, true) => VehicleOutcome::Survived,
            (true, false) => VehicleOutcome::Attacked,
        };
        out.detected += b as usize;
        out.successes += (v == VehicleOutcome::Attacked) as usize;
        out.vehicles.push(v);
    }
    Ok(out)
}
