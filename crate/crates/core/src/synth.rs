//! Ray-cast scenes rendered exactly through a [`LaserModel`].
//!
//! Every return lies on a beam of the model, so projecting a synthetic
//! cloud through the same model is lossless.

use nalgebra::Vector3;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{BoundingBox3D, Point, PointCloud};
use crate::error::{Error, Result};
use crate::par;
use crate::rangesim::LaserModel;

/// Ground height below the sensor, as on a roof-mounted car LiDAR.
pub const GROUND_Z: f64 = -1.73;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub boxes: Vec<BoundingBox3D>,
    pub ground_z: Option<f64>,
    pub max_range: f64,
    pub box_intensity: f64,
    pub ground_intensity: f64,
}

impl SceneSpec {
    pub fn new(boxes: Vec<BoundingBox3D>) -> Self {
        Self {
            boxes,
            ground_z: Some(GROUND_Z),
            max_range: 80.0,
            box_intensity: 0.5,
            ground_intensity: 0.1,
        }
    }

    pub fn without_ground(mut self) -> Self {
        self.ground_z = None;
        self
    }
}

/// Entry distance of the ray into the box, if it is hit ahead of the origin.
fn hit_box(b: &BoundingBox3D, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
    let o = b.to_local(origin);
    let d = b.to_local(&(origin + dir)) - o;
    let half = b.dims() * 0.5;
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..3 {
        if d[k] == 0.0 {
            if o[k].abs() > half[k] {
                return None;
            }
            continue;
        }
        let a = (-half[k] - o[k]) / d[k];
        let c = (half[k] - o[k]) / d[k];
        t0 = t0.max(a.min(c));
        t1 = t1.min(a.max(c));
    }
    (t0 <= t1 && t0 > 0.0).then_some(t0)
}

/// One return per beam that hits a box or the ground within range.
pub fn raycast(model: &LaserModel, spec: &SceneSpec, frame_id: &str) -> PointCloud {
    let width = model.azimuth_bins();
    let hits = par::map_range(model.ring_count() * width, |cell| {
        let (row, col) = (cell / width, cell % width);
        let unit = model.beam_point(row, col, 1.0);
        let h = model.effective_height(row);
        let origin = Vector3::new(0.0, 0.0, h);
        let dir = Vector3::new(unit[0], unit[1], unit[2] - h);
        let mut best: Option<(f64, f64)> = None;
        for b in &spec.boxes {
            if let Some(t) = hit_box(b, &origin, &dir) {
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, spec.box_intensity));
                }
            }
        }
        if let Some(g) = spec.ground_z {
            if dir.z < 0.0 {
                let t = (g - h) / dir.z;
                if t > 0.0 && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, spec.ground_intensity));
                }
            }
        }
        best.filter(|&(t, _)| t <= spec.max_range).map(|(t, i)| {
            let [x, y, z] = model.beam_point(row, col, t);
            (Point::new(x, y, z, i), row as u16)
        })
    });
    let (points, rings): (Vec<Point>, Vec<u16>) = hits.into_iter().flatten().unzip();
    PointCloud::from_parts(frame_id, points, Some(rings))
}

/// `count` returns on distinct random cells, at beam ranges drawn uniformly
/// from `[min_range, max_range]`.
pub fn sample_beams(model: &LaserModel, count: usize, min_range: f64, max_range: f64, seed: u64) -> Result<PointCloud> {
    let cells = model.ring_count() * model.azimuth_bins();
    if count > cells {
        return Err(Error::InvalidGenerator(format!("{count} points exceed {cells} cells")));
    }
    if !(min_range > 0.0 && min_range <= max_range) {
        return Err(Error::InvalidGenerator("need 0 < min_range <= max_range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = index::sample(&mut rng, cells, count).into_vec();
    chosen.sort_unstable();
    let width = model.azimuth_bins();
    let mut points = Vec::with_capacity(count);
    let mut rings = Vec::with_capacity(count);
    for cell in chosen {
        let (row, col) = (cell / width, cell % width);
        let range = rng.random_range(min_range..=max_range);
        let [x, y, z] = model.beam_point(row, col, range);
        points.push(Point::new(x, y, z, rng.random::<f64>()));
        rings.push(row as u16);
    }
    Ok(PointCloud::from_parts("beams", points, Some(rings)))
}

/// A parked car on the ground plane.
pub fn car_at(x: f64, y: f64, yaw: f64) -> BoundingBox3D {
    let (l, w, h) = (4.0, 1.8, 1.5);
    BoundingBox3D::new([x, y, GROUND_Z + 0.5 * h], [l, w, h], yaw, "Car").expect("static dims")
}

/// A target car 8 to 14 m ahead plus `others` cars further away, no two
/// overlapping in bird's-eye view.
pub fn street(seed: u64, others: usize) -> Vec<BoundingBox3D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boxes = vec![car_at(
        rng.random_range(8.0..14.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(-0.6..0.6),
    )];
    let mut attempts = 0;
    while boxes.len() < others + 1 && attempts < 1000 {
        attempts += 1;
        let r = rng.random_range(18.0..40.0);
        let phi: f64 = rng.random_range(-2.5..2.5);
        let cand = car_at(r * phi.cos(), r * phi.sin(), rng.random_range(-3.1..3.1));
        if boxes.iter().all(|b| (b.center() - cand.center()).xy().norm() > 6.0) {
            boxes.push(cand);
        }
    }
    boxes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rangesim::{backproject, project};

    #[test]
    fn wall_box_hit_at_face() {
        let model = LaserModel::uniform(8, 0.05, -0.2, 64).unwrap();
        let b = BoundingBox3D::new([10.0, 0.0, 0.0], [2.0, 40.0, 10.0], 0.0, "Wall").unwrap();
        let cloud = raycast(&model, &SceneSpec::new(vec![b]).without_ground(), "w");
        assert!(!cloud.is_empty());
        for p in cloud.points() {
            assert!((p.x - 9.0).abs() < 1e-9);
        }
    }

    #[test]
    fn raycast_roundtrips() {
        let model = LaserModel::uniform(16, 0.03, -0.35, 256)
            .unwrap()
            .with_heights(&(0..16).map(|i| 0.01 * i as f64).collect::<Vec<_>>())
            .unwrap();
        let cloud = raycast(&model, &SceneSpec::new(street(3, 2)), "s");
        let back = backproject(&project(&cloud, &model).unwrap()).unwrap();
        assert_eq!(back.len(), cloud.len());
        for (p, q) in back.points().iter().zip(cloud.points()) {
            assert!(p.distance(q) < 1e-9);
        }
    }

    #[test]
    fn sampled_beams_are_distinct_and_seeded() {
        let model = LaserModel::uniform(4, 0.1, -0.1, 32).unwrap();
        let a = sample_beams(&model, 100, 2.0, 30.0, 9).unwrap();
        assert_eq!(a, sample_beams(&model, 100, 2.0, 30.0, 9).unwrap());
        assert_eq!(project(&a, &model).unwrap().occupied(), 100);
        assert!(sample_beams(&model, 200, 2.0, 30.0, 9).is_err());
    }

    #[test]
    fn street_has_target_first() {
        let boxes = street(11, 3);
        let d = boxes[0].center().xy().norm();
        assert!(boxes[1..].iter().all(|b| b.center().xy().norm() > d));
    }
}
