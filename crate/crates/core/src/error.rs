use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point {index}: {reason}")]
    InvalidPoint { index: usize, reason: &'static str },

    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("rotation is not orthonormal with det +1 (deviation {deviation:e})")]
    NonOrthonormal { deviation: f64 },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("invalid laser model: {0}")]
    InvalidModel(String),

    #[error("point {index} lies within {min_range} m of the sensor origin")]
    PointTooClose { index: usize, min_range: f64 },

    #[error("invalid range image: {0}")]
    InvalidImage(String),

    #[error("ring {ring} cannot be fitted: {reason}")]
    Unfittable { ring: usize, reason: String },

    #[error("invalid generator input: {0}")]
    InvalidGenerator(String),

    #[error("frame count mismatch: {left} vs {right}")]
    FrameCountMismatch { left: usize, right: usize },

    #[error("invalid fusion config: {0}")]
    InvalidConfig(String),

    #[error("fusion mode {mode} is infeasible: {reason}")]
    InfeasibleMode { mode: &'static str, reason: String },

    #[error("sensor origin lies inside the target box")]
    SensorInsideBox,

    #[error("detection sets disagree: {0}")]
    FrameSetMismatch(String),

    #[error("missing detections for frame {frame_id}")]
    MissingDetections { frame_id: String },

    #[error("occlusion ratio undefined: no points in the box before perturbation")]
    EmptyBeforeCount,

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
