//! Attack scoring: 3D IoU, greedy matching, attack success rate, occlusion
//! ratio, the point-count mock detector and grid sweeps.

mod asr;
mod detection;
mod iou;
mod mock;
mod occlusion;
mod sweep;

pub use asr::{attack_success, match_vehicles, AttackOutcome, Thresholds, VehicleOutcome};
pub use detection::{is_vehicle_class, Detection, DetectionSet};
pub use iou::{bev_intersection, iou3d};
pub use mock::{MockDetector, MOCK_DETECTOR_NAME};
pub use occlusion::{occlusion_from_counts, occlusion_ratio};
pub use sweep::{
    sweep, CellResult, DetectionProvider, FileProvider, MockProvider, SceneFrame, Stage, SweepCell, SweepGrid,
    SweepResult, CSV_HEADER,
};
