//! KITTI-style frame and label files.
//!
//! A frame is a headerless little-endian sequence of `(x, y, z, intensity)`
//! 32-bit floats, 16 bytes per point. A label file holds one box per line as
//! whitespace-separated `cx cy cz l w h yaw class`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::cloud::{BoundingBox3D, Point, PointCloud};
use crate::error::{Error, Result};

const POINT_BYTES: usize = 16;

pub fn decode_frame(bytes: &[u8], frame_id: &str, path: &Path) -> Result<PointCloud> {
    if !bytes.len().is_multiple_of(POINT_BYTES) {
        return Err(Error::malformed(
            path,
            format!("length {} is not a multiple of {POINT_BYTES} bytes", bytes.len()),
        ));
    }
    let mut points = Vec::with_capacity(bytes.len() / POINT_BYTES);
    for (index, chunk) in bytes.chunks_exact(POINT_BYTES).enumerate() {
        let f = |k: usize| f32::from_le_bytes(chunk[4 * k..4 * k + 4].try_into().unwrap()) as f64;
        let (x, y, z, i) = (f(0), f(1), f(2), f(3));
        if !(x.is_finite() && y.is_finite() && z.is_finite() && i.is_finite()) {
            return Err(Error::malformed(path, format!("non-finite value in point {index}")));
        }
        // Some exporters write intensity slightly outside [0, 1].
        points.push(Point::new(x, y, z, i.clamp(0.0, 1.0)));
    }
    PointCloud::new(frame_id, points)
}

pub fn encode_frame(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * POINT_BYTES);
    for p in cloud.points() {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

/// Reads a binary frame; the frame id is the file stem.
pub fn read_frame(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_frame(&bytes, &id, path)
}

pub fn write_frame(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_frame(cloud)).map_err(|e| Error::io(path, e))
}

pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<BoundingBox3D>> {
    let mut boxes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(Error::malformed(
                path,
                format!("line {}: expected 8 fields, found {}", lineno + 1, fields.len()),
            ));
        }
        let mut nums = [0.0f64; 7];
        for (k, slot) in nums.iter_mut().enumerate() {
            *slot = fields[k].parse().map_err(|_| {
                Error::malformed(path, format!("line {}: bad number {:?}", lineno + 1, fields[k]))
            })?;
        }
        let b = BoundingBox3D::new(
            [nums[0], nums[1], nums[2]],
            [nums[3], nums[4], nums[5]],
            nums[6],
            fields[7],
        )
        .map_err(|e| Error::malformed(path, format!("line {}: {e}", lineno + 1)))?;
        boxes.push(b);
    }
    Ok(boxes)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<BoundingBox3D>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text, path)
}

pub fn write_labels(path: impl AsRef<Path>, boxes: &[BoundingBox3D]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for b in boxes {
        let c = b.center();
        let d = b.dims();
        writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            c.x,
            c.y,
            c.z,
            d.x,
            d.y,
            d.z,
            b.yaw(),
            b.label()
        )
        .expect("write to Vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_roundtrip_through_f32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("000001.bin");
        let cloud = PointCloud::new(
            "000001",
            vec![Point::new(1.5, -2.25, 0.125, 0.5), Point::new(10.0, 0.0, -1.75, 0.0)],
        )
        .unwrap();
        write_frame(&path, &cloud).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 32);
        let back = read_frame(&path).unwrap();
        assert_eq!(back, cloud);
        assert_eq!(back.frame_id(), "000001");
    }

    #[test]
    fn truncated_frame_is_malformed() {
        let err = decode_frame(&[0u8; 20], "x", Path::new("x.bin")).unwrap_err();
        assert!(matches!(err, Error::Malformed { .. }));
    }

    #[test]
    fn labels_parse_and_reject() {
        let text = "# cx cy cz l w h yaw class\n10 0 -0.9 4.2 1.8 1.5 0.1 Car\n\n";
        let boxes = parse_labels(text, Path::new("l.txt")).unwrap();
        assert_eq!(boxes.len(), 1);
        assert_eq!(boxes[0].label(), "Car");
        assert!(parse_labels("1 2 3 Car", Path::new("l.txt")).is_err());
        assert!(parse_labels("1 2 3 0 1 1 0 Car", Path::new("l.txt")).is_err());
    }
}
