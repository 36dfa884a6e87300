use std::f64::consts::PI;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Unfolded {
    pub cloud: PointCloud,
    pub ring_count: usize,
}

/// Splits a capture-ordered cloud into laser rings by finding azimuth
/// wrap-arounds.
///
/// Each laser sweeps the full circle before the next one starts, so a ring
/// boundary shows up as a jump of more than pi against the sweep direction.
/// The sweep direction is taken from the majority sign of small steps.
/// Clouds that already carry a ring channel are returned unchanged.
pub fn scan_unfold(cloud: &PointCloud) -> Result<Unfolded> {
    if let Some(rings) = cloud.rings() {
        let ring_count = rings.iter().map(|&r| r as usize + 1).max().unwrap_or(0);
        return Ok(Unfolded {
            cloud: cloud.clone(),
            ring_count,
        });
    }
    if cloud.is_empty() {
        return Ok(Unfolded {
            cloud: cloud.clone(),
            ring_count: 0,
        });
    }
    let phi: Vec<f64> = cloud.points().iter().map(|p| p.azimuth()).collect();
    let steps: Vec<f64> = phi.windows(2).map(|w| w[1] - w[0]).collect();
    let forward = steps.iter().filter(|&&s| s > 0.0 && s < PI).count();
    let backward = steps.iter().filter(|&&s| s < 0.0 && s > -PI).count();
    let sign = if backward > forward { -1.0 } else { 1.0 };

    let mut rings = Vec::with_capacity(cloud.len());
    let mut ring: usize = 0;
    rings.push(0u16);
    for s in steps {
        if sign * s < -PI {
            ring += 1;
        }
        let tag = u16::try_from(ring)
            .map_err(|_| Error::InvalidModel("more than 65535 rings detected".into()))?;
        rings.push(tag);
    }
    Ok(Unfolded {
        cloud: cloud.clone().with_rings(rings)?,
        ring_count: ring + 1,
    })
}
