use mistfuse::distance::{chamfer, chamfer_with, directed_hausdorff, hausdorff, hausdorff_with, SearchStrategy};
use mistfuse::{Point, PointCloud};
use proptest::prelude::*;

fn cloud_strategy(max: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -2.0..2.0f64), 1..max)
        .prop_map(|v| PointCloud::new("p", v.into_iter().map(|(x, y, z)| Point::xyz(x, y, z)).collect()).unwrap())
}

fn brute_directed(a: &PointCloud, b: &PointCloud) -> Vec<f64> {
    a.points()
        .iter()
        .map(|p| b.points().iter().map(|q| p.distance_squared(q)).fold(f64::INFINITY, f64::min).sqrt())
        .collect()
}

proptest! {
    #[test]
    fn symmetric_and_ordered(a in cloud_strategy(60), b in cloud_strategy(60)) {
        let c = chamfer(&a, &b).unwrap();
        let h = hausdorff(&a, &b).unwrap();
        prop_assert_eq!(c, chamfer(&b, &a).unwrap());
        prop_assert_eq!(h, hausdorff(&b, &a).unwrap());
        prop_assert!(h >= c);
        prop_assert!(directed_hausdorff(&a, &b).unwrap() <= h);
    }

    #[test]
    fn grid_search_matches_brute_force(a in cloud_strategy(400), b in cloud_strategy(400)) {
        prop_assert_eq!(
            hausdorff_with(&a, &b, SearchStrategy::Grid).unwrap(),
            hausdorff_with(&a, &b, SearchStrategy::BruteForce).unwrap()
        );
        prop_assert_eq!(
            chamfer_with(&a, &b, SearchStrategy::Grid).unwrap(),
            chamfer_with(&a, &b, SearchStrategy::BruteForce).unwrap()
        );
    }

    #[test]
    fn matches_quadratic_oracle(a in cloud_strategy(80), b in cloud_strategy(80)) {
        let ab = brute_directed(&a, &b);
        let ba = brute_directed(&b, &a);
        let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        prop_assert_eq!(hausdorff(&a, &b).unwrap(), max(&ab).max(max(&ba)));
        prop_assert!((chamfer(&a, &b).unwrap() - 0.5 * (mean(&ab) + mean(&ba))).abs() < 1e-12);
    }
}

#[test]
fn clustered_points_use_the_grid_correctly() {
    // Two dense clusters far apart stress empty grid cells.
    let mk = |cx: f64, n: usize, s: f64| {
        PointCloud::new(
            "c",
            (0..n)
                .map(|k| {
                    let f = k as f64;
                    Point::xyz(cx + s * (f * 0.618).fract(), s * (f * 0.414).fract(), s * (f * 0.732).fract())
                })
                .collect(),
        )
        .unwrap()
    };
    let a = PointCloud::new("a", [mk(0.0, 600, 0.2).into_points(), mk(40.0, 600, 0.3).into_points()].concat()).unwrap();
    let b = mk(20.0, 700, 1.0);
    assert_eq!(
        hausdorff_with(&a, &b, SearchStrategy::Grid).unwrap(),
        hausdorff_with(&a, &b, SearchStrategy::BruteForce).unwrap()
    );
    assert_eq!(
        hausdorff_with(&b, &a, SearchStrategy::Grid).unwrap(),
        hausdorff_with(&b, &a, SearchStrategy::BruteForce).unwrap()
    );
}
