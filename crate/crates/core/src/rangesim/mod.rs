//! Range-image LiDAR simulation.
//!
//! Points are binned by laser row and azimuth column; a z-buffer keeps only
//! the return nearest to the sensor in each cell, and back-projection turns
//! the surviving depths into points along each cell's beam. The laser model
//! lets every ring have its own origin height, which is what makes the
//! round trip lossless on data recorded by such a sensor.

mod export;
mod fit;
mod image;
mod model;
mod unfold;

pub use export::{encode_pgm, write_debug_image};
pub use fit::{fit_laser_model, fit_rings, RingFit, MIN_POINTS_PER_RING};
pub use image::{
    backproject, backproject_with_sources, locate, project, roundtrip_loss, Backprojected, CellHit,
    RangeImage, RoundtripLoss, MIN_RANGE, NO_SOURCE,
};
pub use model::{LaserModel, Ring, RingHit, DEFAULT_AZIMUTH_BINS, MIN_AZIMUTH_BINS};
pub use unfold::{scan_unfold, Unfolded};
