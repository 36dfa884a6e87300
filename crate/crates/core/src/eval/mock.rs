use crate::cloud::{crop_indices, BoundingBox3D, PointCloud};

use super::detection::{is_vehicle_class, Detection, DetectionSet};

pub const MOCK_DETECTOR_NAME: &str = "mock";

/// Point-count stand-in for a 3D detector.
///
/// Each vehicle box holding at least `min_points` points (box grown by
/// `margin`) yields a detection on that box with confidence
/// `min(1, n / (2 * min_points))`. It clears the default 0.5 confidence
/// threshold only when `n > min_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MockDetector {
    pub min_points: usize,
    pub margin: f64,
}

impl Default for MockDetector {
    fn default() -> Self {
        Self {
            min_points: 20,
            margin: 0.1,
        }
    }
}

impl MockDetector {
    pub fn new(min_points: usize, margin: f64) -> Self {
        Self {
            min_points: min_points.max(1),
            margin,
        }
    }

    pub fn confidence(&self, count: usize) -> f64 {
        (count as f64 / (2 * self.min_points) as f64).min(1.0)
    }

    pub fn detect(&self, frame_id: &str, points: &PointCloud, boxes: &[BoundingBox3D]) -> DetectionSet {
        let detections = boxes
            .iter()
            .filter(|b| is_vehicle_class(b.label()))
            .filter_map(|b| {
                let n = crop_indices(points, b, self.margin).len();
                (n >= self.min_points).then(|| Detection {
                    bbox: b.clone(),
                    confidence: self.confidence(n),
                })
            })
            .collect();
        DetectionSet::new(frame_id, MOCK_DETECTOR_NAME, detections)
    }
}
