use crate::cloud::PointCloud;
use crate::error::{Error, Result};

use super::model::{LaserModel, Ring};

pub const MIN_POINTS_PER_RING: usize = 10;

/// Least-squares line `z = tan(theta) * d_xy + h` for one ring tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingFit {
    pub ring_id: usize,
    pub inclination: f64,
    pub height: f64,
    pub points: usize,
    pub rms_residual: f64,
}

/// Fits every ring tag present in the cloud. Rings are returned in tag order.
pub fn fit_rings(cloud: &PointCloud) -> Result<Vec<RingFit>> {
    let tags = cloud.rings().ok_or_else(|| {
        Error::InvalidModel("cloud has no ring channel; unfold the scan first".into())
    })?;
    let ring_count = tags.iter().map(|&r| r as usize + 1).max().unwrap_or(0);
    let mut groups: Vec<Vec<(f64, f64)>> = vec![Vec::new(); ring_count];
    for (p, &tag) in cloud.points().iter().zip(tags) {
        groups[tag as usize].push((p.range_xy(), p.z));
    }
    groups
        .iter()
        .enumerate()
        .map(|(ring_id, pts)| fit_line(ring_id, pts))
        .collect()
}

fn fit_line(ring_id: usize, pts: &[(f64, f64)]) -> Result<RingFit> {
    if pts.len() < MIN_POINTS_PER_RING {
        return Err(Error::Unfittable {
            ring: ring_id,
            reason: format!("{} points, need at least {MIN_POINTS_PER_RING}", pts.len()),
        });
    }
    let n = pts.len() as f64;
    let mean_d = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_z = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(d, z) in pts {
        sxx += (d - mean_d) * (d - mean_d);
        sxy += (d - mean_d) * (z - mean_z);
    }
    if sxx <= 1e-12 * n * mean_d.abs().max(1.0).powi(2) {
        return Err(Error::Unfittable {
            ring: ring_id,
            reason: "all points share one horizontal distance".into(),
        });
    }
    let slope = sxy / sxx;
    let height = mean_z - slope * mean_d;
    let ss: f64 = pts
        .iter()
        .map(|&(d, z)| {
            let r = z - (slope * d + height);
            r * r
        })
        .sum();
    Ok(RingFit {
        ring_id,
        inclination: slope.atan(),
        height,
        points: pts.len(),
        rms_residual: (ss / n).sqrt(),
    })
}

/// Fits `(theta_i, h_i)` per ring tag and assembles a model with the
/// per-ring origin back-projection enabled. Rows are sorted by decreasing
/// inclination.
pub fn fit_laser_model(cloud: &PointCloud, azimuth_bins: usize) -> Result<LaserModel> {
    let fits = fit_rings(cloud)?;
    let rings = fits
        .iter()
        .map(|f| Ring {
            inclination: f.inclination,
            height: f.height,
        })
        .collect();
    LaserModel::from_unsorted(rings, azimuth_bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point;

    fn ring_points(theta: f64, h: f64, n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let d = 4.0 + i as f64 * 0.05;
                let a = i as f64 * 0.1;
                Point::xyz(d * a.cos(), d * a.sin(), theta.tan() * d + h)
            })
            .collect()
    }

    #[test]
    fn noiseless_ring_recovered() {
        let pts = ring_points(0.05, 0.12, 200);
        let c = PointCloud::new("r", pts).unwrap().with_rings(vec![0; 200]).unwrap();
        let fit = fit_rings(&c).unwrap()[0];
        assert!((fit.inclination - 0.05).abs() < 1e-9);
        assert!((fit.height - 0.12).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn identical_distance_is_unfittable() {
        let pts: Vec<Point> = (0..20)
            .map(|i| {
                let a = i as f64 * 0.3;
                Point::xyz(5.0 * a.cos(), 5.0 * a.sin(), 0.1 * i as f64)
            })
            .collect();
        let c = PointCloud::new("r", pts).unwrap().with_rings(vec![0; 20]).unwrap();
        assert!(matches!(fit_rings(&c), Err(Error::Unfittable { ring: 0, .. })));
    }

    #[test]
    fn too_few_points_is_unfittable() {
        let c = PointCloud::new("r", ring_points(0.0, 0.0, 9))
            .unwrap()
            .with_rings(vec![0; 9])
            .unwrap();
        assert!(matches!(fit_rings(&c), Err(Error::Unfittable { .. })));
    }

    #[test]
    fn untagged_cloud_rejected() {
        let c = PointCloud::new("r", ring_points(0.0, 0.0, 20)).unwrap();
        assert!(fit_laser_model(&c, 64).is_err());
    }

    #[test]
    fn model_rows_sorted_by_inclination() {
        let mut pts = ring_points(-0.1, 0.05, 50);
        pts.extend(ring_points(0.02, -0.03, 50));
        let mut tags = vec![0u16; 50];
        tags.extend(vec![1u16; 50]);
        let c = PointCloud::new("r", pts).unwrap().with_rings(tags).unwrap();
        let m = fit_laser_model(&c, 128).unwrap();
        assert!((m.rings()[0].inclination - 0.02).abs() < 1e-9);
        assert!((m.rings()[1].height - 0.05).abs() < 1e-9);
    }
}
