//! Debug export: a 16-bit binary PGM of depth in centimeters (0 = empty)
//! plus the laser model as a TOML sidecar.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::image::RangeImage;

pub fn encode_pgm(image: &RangeImage) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    let mut out = format!("P5\n{w} {h}\n65535\n").into_bytes();
    out.reserve(2 * w * h);
    for row in 0..h {
        for col in 0..w {
            let v = match image.depth(row, col) {
                None => 0u16,
                Some(d) => (d * 100.0).round().clamp(1.0, 65535.0) as u16,
            };
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}

/// Writes `<path>` as PGM and `<path>.model.toml` with the per-ring model.
pub fn write_debug_image(image: &RangeImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".model.toml");
    image.model().write(Path::new(&sidecar))
}
