use crate::cloud::BoundingBox3D;

type P2 = [f64; 2];

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segment_hit(p: P2, q: P2, a: P2, b: P2) -> P2 {
    let (dp, dq) = (cross(a, b, p), cross(a, b, q));
    let t = dp / (dp - dq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Sutherland-Hodgman clip of `subject` against the convex CCW `clip`.
fn clip_polygon(subject: &[P2], clip: &[P2]) -> Vec<P2> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (p_in, q_in) = (cross(a, b, p) >= 0.0, cross(a, b, q) >= 0.0);
            if p_in {
                out.push(p);
                if !q_in {
                    out.push(segment_hit(p, q, a, b));
                }
            } else if q_in {
                out.push(segment_hit(p, q, a, b));
            }
        }
    }
    out
}

fn polygon_area(poly: &[P2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let o = poly[0];
    let mut twice = 0.0;
    for w in poly[1..].windows(2) {
        twice += cross(o, w[0], w[1]);
    }
    0.5 * twice.abs()
}

/// Overlap area of the two boxes' bird's-eye footprints.
pub fn bev_intersection(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    polygon_area(&clip_polygon(&a.bev_corners(), &b.bev_corners()))
}

/// Volumetric intersection over union of two yawed boxes.
pub fn iou3d(a: &BoundingBox3D, b: &BoundingBox3D) -> f64 {
    let dz = a.top_z().min(b.top_z()) - a.bottom_z().max(b.bottom_z());
    if dz <= 0.0 {
        return 0.0;
    }
    let inter = bev_intersection(a, b) * dz;
    if inter <= 0.0 {
        return 0.0;
    }
    (inter / (a.volume() + b.volume() - inter)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(c: [f64; 3], d: [f64; 3], yaw: f64) -> BoundingBox3D {
        BoundingBox3D::new(c, d, yaw, "Car").unwrap()
    }

    #[test]
    fn identical_and_disjoint() {
        let a = bx([1.0, 2.0, 0.0], [4.0, 2.0, 1.5], 0.7);
        assert!((iou3d(&a, &a) - 1.0).abs() < 1e-12);
        let far = bx([20.0, 2.0, 0.0], [4.0, 2.0, 1.5], 0.7);
        assert_eq!(iou3d(&a, &far), 0.0);
        let above = bx([1.0, 2.0, 5.0], [4.0, 2.0, 1.5], 0.7);
        assert_eq!(iou3d(&a, &above), 0.0);
    }

    #[test]
    fn axis_aligned_closed_form() {
        let a = bx([0.0, 0.0, 0.0], [4.0, 2.0, 2.0], 0.0);
        let b = bx([1.0, 0.5, 0.5], [4.0, 2.0, 2.0], 0.0);
        // Overlap 3 x 1.5 x 1.5.
        let inter = 3.0 * 1.5 * 1.5;
        let expect = inter / (16.0 + 16.0 - inter);
        assert!((iou3d(&a, &b) - expect).abs() < 1e-12);
    }

    #[test]
    fn square_rotated_45_inside_square() {
        // Unit-height squares: side 2 axis-aligned vs side 2 rotated 45 degrees.
        let a = bx([0.0, 0.0, 0.0], [2.0, 2.0, 1.0], 0.0);
        let b = bx([0.0, 0.0, 0.0], [2.0, 2.0, 1.0], std::f64::consts::FRAC_PI_4);
        // Octagon area: 4 - 4 corner triangles with legs (2 - sqrt2).
        let leg = 2.0 - 2f64.sqrt();
        let inter = 4.0 - 2.0 * leg * leg;
        assert!((bev_intersection(&a, &b) - inter).abs() < 1e-12);
        assert!((iou3d(&a, &b) - inter / (8.0 - inter)).abs() < 1e-12);
    }

    #[test]
    fn symmetric() {
        let a = bx([0.3, -0.2, 0.1], [4.1, 1.7, 1.5], 0.4);
        let b = bx([1.0, 0.4, 0.0], [3.9, 1.9, 1.4], -0.2);
        assert_eq!(iou3d(&a, &b), iou3d(&b, &a));
    }
}
