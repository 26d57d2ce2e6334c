use bmhull::geometry::cross;
use bmhull::{convex_hull, Point, QuadSpec};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point> {
    // A coarse lattice mixed with continuous coordinates exercises both
    // collinear/duplicate inputs and general position.
    prop_oneof![
        (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(x, y)| Point::new(x, y)),
        (-5i32..5, -5i32..5).prop_map(|(x, y)| Point::new(x as f64, y as f64)),
    ]
}

fn points(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(point(), 1..max)
}

/// Tolerance for "on or inside" relative to the coordinate scale.
fn slack(pts: &[Point]) -> f64 {
    let scale = pts
        .iter()
        .fold(1.0f64, |s, p| s.max(p.x.abs()).max(p.y.abs()));
    1e-9 * scale * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn vertices_are_input_points(pts in points(200)) {
        let hull = convex_hull(&pts).unwrap();
        for v in hull.vertices() {
            prop_assert!(pts.contains(v));
        }
    }

    #[test]
    fn vertices_strictly_convex_counterclockwise(pts in points(200)) {
        let hull = convex_hull(&pts).unwrap();
        let v = hull.vertices();
        if v.len() >= 3 {
            for i in 0..v.len() {
                let (a, b, c) = (v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]);
                prop_assert!(cross(a, b, c) > 0.0, "turn at {:?}", b);
            }
        }
        // Starts from the lexicographically smallest point.
        let first = v[0];
        for p in &pts {
            prop_assert!((first.x, first.y) <= (p.x, p.y));
        }
    }

    #[test]
    fn every_point_is_contained(pts in points(200)) {
        let hull = convex_hull(&pts).unwrap();
        let v = hull.vertices();
        let eps = slack(&pts);
        if v.len() >= 3 {
            for p in &pts {
                for i in 0..v.len() {
                    prop_assert!(cross(v[i], v[(i + 1) % v.len()], *p) >= -eps);
                }
            }
        }
    }

    #[test]
    fn idempotent(pts in points(200)) {
        let hull = convex_hull(&pts).unwrap();
        let again = convex_hull(hull.vertices()).unwrap();
        prop_assert_eq!(hull, again);
    }

    #[test]
    fn monotone_under_inclusion(a in points(100), b in points(100)) {
        let small = convex_hull(&a).unwrap();
        let union: Vec<Point> = a.iter().chain(&b).copied().collect();
        let big = convex_hull(&union).unwrap();
        let tol = 1e-9 * big.perimeter().max(1.0);
        prop_assert!(small.area() <= big.area() + tol * big.perimeter());
        // A degenerate subset has perimeter 2l, still bounded by the
        // enclosing convex set.
        prop_assert!(small.perimeter() <= big.perimeter() + tol);
    }

    #[test]
    fn translation_invariant(pts in points(100), dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let hull = convex_hull(&pts).unwrap();
        let moved: Vec<Point> = pts.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect();
        let hull2 = convex_hull(&moved).unwrap();
        let tol = 1e-9 * (1.0 + hull.perimeter());
        prop_assert!((hull.perimeter() - hull2.perimeter()).abs() <= tol * 10.0);
        prop_assert!((hull.area() - hull2.area()).abs() <= tol * (1.0 + hull.perimeter()) * 100.0);
    }

    #[test]
    fn cauchy_formulas_on_random_hulls(pts in prop::collection::vec((-1f64..1.0, -1f64..1.0), 3..60)) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let hull = convex_hull(&pts).unwrap();
        let quad = QuadSpec::with_tol(1e-12);
        let p = hull.cauchy_perimeter(&quad).unwrap().value;
        prop_assert!((p - hull.perimeter()).abs() <= 1e-9 * hull.perimeter().max(1e-3));
        if !hull.is_degenerate() {
            let a = hull.cauchy_area(&quad).unwrap().value;
            prop_assert!((a - hull.area()).abs() <= 1e-9 * hull.area().max(1e-6) + 1e-12);
        }
    }

    #[test]
    fn support_function_dominates_points(pts in points(100), theta in 0.0f64..std::f64::consts::TAU) {
        let hull = convex_hull(&pts).unwrap();
        let h = hull.support_function(theta);
        let (c, s) = (theta.cos(), theta.sin());
        let best = pts.iter().map(|p| p.x * c + p.y * s).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((h - best).abs() <= 1e-9 * (1.0 + best.abs()));
    }
}

/// Large inputs take the prefiltered path; it must agree with the plain
/// algorithm on sampled paths, whose hulls are dominated by few points.
#[test]
fn prefilter_agrees_on_random_walks() {
    let spec = bmhull::EnsembleSpec::new(2, 2, 2048, 9).unwrap();
    for r in 0..20 {
        let pts = spec.sample_replicate(r).unwrap().all_points();
        let hull = convex_hull(&pts).unwrap();
        // Every point lies inside the hull.
        let v = hull.vertices();
        for p in &pts {
            for i in 0..v.len() {
                assert!(cross(v[i], v[(i + 1) % v.len()], *p) >= -1e-12);
            }
        }
        // Only small batches avoid the filter; chaining them must give the
        // same result.
        let pieces: Vec<Point> = pts
            .chunks(50)
            .flat_map(|c| convex_hull(c).unwrap().vertices().to_vec())
            .collect();
        assert_eq!(hull, convex_hull(&pieces).unwrap());
    }
}
