//! Planar convex hulls and the functionals measured on them.
//!
//! Hulls are built with Andrew's monotone chain. For large inputs an
//! Akl-Toussaint pass first discards points strictly inside the octagon of
//! extreme points in the eight compass directions; sampled Brownian paths
//! have only a few dozen hull vertices among thousands of points, so this
//! removes nearly all of the sorting work. Orientation tests use the plain
//! floating-point cross product; a zero cross product counts as collinear.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadSpec, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    fn dot_dir(self, cos: f64, sin: f64) -> f64 {
        self.x * cos + self.y * sin
    }
}

/// Twice the signed area of the triangle `o, a, b`; positive when `b` lies to
/// the left of `o -> a`.
#[inline]
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex polygon given by its extreme points in counterclockwise order,
/// starting from the lexicographically smallest `(x, y)`.
///
/// One vertex is a point hull and two vertices a segment hull; both count as
/// degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Boundary length. A segment of length `l` has perimeter `2l`, its
    /// boundary traversed both ways; a point has perimeter zero.
    pub fn perimeter(&self) -> f64 {
        if self.vertices.len() < 2 {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| (b.x - a.x).hypot(b.y - a.y))
            .sum()
    }

    /// Shoelace area; zero for degenerate hulls.
    pub fn area(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let twice: f64 = self.edges().map(|(a, b)| a.x * b.y - a.y * b.x).sum();
        0.5 * twice
    }

    /// Index of the vertex maximising the projection onto `(cos, sin)`.
    fn active_vertex(&self, cos: f64, sin: f64) -> usize {
        let mut best = 0;
        let mut best_value = self.vertices[0].dot_dir(cos, sin);
        for (i, v) in self.vertices.iter().enumerate().skip(1) {
            let value = v.dot_dir(cos, sin);
            if value > best_value {
                best = i;
                best_value = value;
            }
        }
        best
    }

    /// Support function `M(theta) = max_v <v, (cos theta, sin theta)>`.
    pub fn support_function(&self, theta: f64) -> f64 {
        let (sin, cos) = theta.sin_cos();
        self.vertices[self.active_vertex(cos, sin)].dot_dir(cos, sin)
    }

    /// Derivative of the support function, `-x sin(theta) + y cos(theta)`
    /// for the active vertex. At an edge-normal angle the one-sided
    /// derivatives differ and either may be returned.
    pub fn support_derivative(&self, theta: f64) -> f64 {
        let (sin, cos) = theta.sin_cos();
        let v = self.vertices[self.active_vertex(cos, sin)];
        -v.x * sin + v.y * cos
    }

    /// Outward edge-normal angles in `[0, 2 pi)`, sorted. Between two
    /// consecutive angles a single vertex is active.
    pub fn edge_normal_angles(&self) -> Vec<f64> {
        if self.vertices.len() < 2 {
            return Vec::new();
        }
        let mut angles: Vec<f64> = self
            .edges()
            .map(|(a, b)| {
                let phi = (-(b.x - a.x)).atan2(b.y - a.y);
                if phi < 0.0 {
                    phi + TAU
                } else {
                    phi
                }
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        angles
    }

    fn sectors(&self) -> Vec<(f64, f64)> {
        let mut cuts = vec![0.0];
        cuts.extend(
            self.edge_normal_angles()
                .into_iter()
                .filter(|&a| a > 0.0 && a < TAU),
        );
        cuts.push(TAU);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Perimeter through Cauchy's formula: the integral of the support
    /// function over a full turn, split at the edge-normal angles.
    pub fn cauchy_perimeter(&self, quad: &QuadSpec) -> Result<Quadrature> {
        self.integrate_over_sectors(|theta| self.support_function(theta), quad)
    }

    /// Area through Cauchy's formula, `(1/2) int (M^2 - M'^2)`, with `M'`
    /// evaluated analytically per sector.
    pub fn cauchy_area(&self, quad: &QuadSpec) -> Result<Quadrature> {
        self.integrate_over_sectors(
            |theta| {
                let m = self.support_function(theta);
                let dm = self.support_derivative(theta);
                0.5 * (m * m - dm * dm)
            },
            quad,
        )
    }

    fn integrate_over_sectors<F: Fn(f64) -> f64>(
        &self,
        f: F,
        quad: &QuadSpec,
    ) -> Result<Quadrature> {
        let mut total = Quadrature {
            value: 0.0,
            error_bound: 0.0,
            evaluations: 0,
        };
        for (a, b) in self.sectors() {
            total = total.plus(integrate(&f, a, b, quad)?);
        }
        Ok(total)
    }
}

/// Convex hull of a nonempty point set.
pub fn convex_hull(points: &[Point]) -> Result<ConvexPolygon> {
    if points.is_empty() {
        return Err(Error::invalid("convex hull of an empty point set"));
    }
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::invalid(
            "convex hull input contains a non-finite point",
        ));
    }
    let candidates = if points.len() > 64 {
        octagon_filter(points)
    } else {
        points.to_vec()
    };
    Ok(monotone_chain(candidates))
}

/// Andrew's monotone chain on an arbitrary (nonempty) point list.
pub(crate) fn monotone_chain(mut pts: Vec<Point>) -> ConvexPolygon {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return ConvexPolygon { vertices: pts };
    }
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    ConvexPolygon { vertices: hull }
}

/// Drops points that lie strictly inside the polygon spanned by the extreme
/// points in the eight directions at multiples of 45 degrees. A small margin
/// keeps every point whose classification could be affected by rounding.
fn octagon_filter(points: &[Point]) -> Vec<Point> {
    // Directions at 0, 45, ..., 315 degrees, unnormalised.
    const DIRS: [(f64, f64); 8] = [
        (1.0, 0.0),
        (1.0, 1.0),
        (0.0, 1.0),
        (-1.0, 1.0),
        (-1.0, 0.0),
        (-1.0, -1.0),
        (0.0, -1.0),
        (1.0, -1.0),
    ];
    let mut best = [points[0]; 8];
    let mut best_key = DIRS.map(|(a, b)| a * points[0].x + b * points[0].y);
    for p in &points[1..] {
        for (slot, &(a, b)) in DIRS.iter().enumerate() {
            let k = a * p.x + b * p.y;
            if k > best_key[slot] {
                best_key[slot] = k;
                best[slot] = *p;
            }
        }
    }
    let mut poly: Vec<Point> = Vec::with_capacity(8);
    for p in best {
        if poly.last() != Some(&p) {
            poly.push(p);
        }
    }
    while poly.len() > 1 && poly.first() == poly.last() {
        poly.pop();
    }
    if poly.len() < 3 {
        return points.to_vec();
    }
    let twice_area: f64 = (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            a.x * b.y - a.y * b.x
        })
        .sum();
    if twice_area <= 0.0 {
        return points.to_vec();
    }

    let scale = points
        .iter()
        .fold(0.0f64, |s, p| s.max(p.x.abs()).max(p.y.abs()))
        .max(f64::MIN_POSITIVE);
    // Edge a -> b as the half-plane  nx * x + ny * y > offset + margin.
    let mut planes = [(0.0f64, 0.0f64, f64::NEG_INFINITY); 8];
    for (i, plane) in planes.iter_mut().enumerate().take(poly.len()) {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let margin = 1e-12 * ex.hypot(ey) * scale;
        *plane = (-ey, ex, ex * a.y - ey * a.x + margin);
    }
    points
        .iter()
        .copied()
        .filter(|p| {
            let slack = planes.iter().fold(f64::INFINITY, |m, &(nx, ny, c)| {
                m.min(nx * p.x + ny * p.y - c)
            });
            slack <= 0.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn pts(raw: &[(f64, f64)]) -> Vec<Point> {
        raw.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn square_drops_interior_point() {
        let hull = convex_hull(&pts(&[
            (0.0, 0.0),
            (1.0, 0.0),
            (1.0, 1.0),
            (0.0, 1.0),
            (0.5, 0.5),
        ]))
        .unwrap();
        assert_eq!(
            hull.vertices(),
            pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).as_slice()
        );
        assert_eq!(hull.perimeter(), 4.0);
        assert_eq!(hull.area(), 1.0);
        assert!(!hull.is_degenerate());
    }

    #[test]
    fn collinear_points_give_segment() {
        let hull = convex_hull(&pts(&[(1.0, 1.0), (0.0, 0.0), (2.0, 2.0)])).unwrap();
        assert_eq!(hull.vertices(), pts(&[(0.0, 0.0), (2.0, 2.0)]).as_slice());
        assert!(hull.is_degenerate());
        assert_eq!(hull.area(), 0.0);
    }

    #[test]
    fn degenerate_perimeter_conventions() {
        let seg = convex_hull(&pts(&[(0.0, 0.0), (3.0, 4.0)])).unwrap();
        assert_eq!(seg.perimeter(), 10.0);
        assert_eq!(seg.area(), 0.0);
        let dot = convex_hull(&pts(&[(2.0, -1.0), (2.0, -1.0)])).unwrap();
        assert_eq!(dot.vertices().len(), 1);
        assert_eq!(dot.perimeter(), 0.0);
        assert_eq!(dot.area(), 0.0);
    }

    #[test]
    fn triangles() {
        let h = 3f64.sqrt();
        let eq = convex_hull(&pts(&[(0.0, 0.0), (2.0, 0.0), (1.0, h)])).unwrap();
        assert!((eq.perimeter() - 6.0).abs() < 1e-15);
        let right = convex_hull(&pts(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)])).unwrap();
        assert_eq!(right.area(), 2.0);
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(matches!(convex_hull(&[]), Err(Error::InvalidArgument(_))));
        assert!(convex_hull(&pts(&[(0.0, f64::NAN)])).is_err());
    }

    #[test]
    fn support_function_of_centred_square() {
        let sq = convex_hull(&pts(&[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])).unwrap();
        assert!((sq.support_function(0.0) - 0.5).abs() < 1e-15);
        assert!((sq.support_function(FRAC_PI_4) - SQRT_2 / 2.0).abs() < 1e-15);
        for &theta in &[0.1, 1.3, 2.9, 5.0] {
            assert!((sq.support_function(theta) - sq.support_function(theta + TAU)).abs() < 1e-14);
        }
    }

    #[test]
    fn support_derivative_matches_central_difference_inside_sector() {
        let poly = convex_hull(&pts(&[(0.0, 0.0), (3.0, 0.5), (2.0, 2.0), (-1.0, 1.5)])).unwrap();
        let h = 1e-6;
        for &theta in &[0.3, 1.2, 2.5, 4.0, 5.5] {
            let fd =
                (poly.support_function(theta + h) - poly.support_function(theta - h)) / (2.0 * h);
            assert!(
                (poly.support_derivative(theta) - fd).abs() < 1e-6,
                "theta={theta}"
            );
        }
    }

    #[test]
    fn edge_normals_of_square_are_axis_directions() {
        let sq = convex_hull(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        let angles = sq.edge_normal_angles();
        let expect = [0.0, PI / 2.0, PI, 1.5 * PI];
        for (a, e) in angles.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn cauchy_formulas_on_fixed_shapes() {
        let quad = QuadSpec::with_tol(1e-12);
        let tri = convex_hull(&pts(&[(0.3, -0.2), (2.0, 0.1), (0.5, 1.7)])).unwrap();
        let per = tri.cauchy_perimeter(&quad).unwrap().value;
        assert!((per - tri.perimeter()).abs() < 1e-12 * tri.perimeter());
        let area = tri.cauchy_area(&quad).unwrap().value;
        assert!((area - tri.area()).abs() < 1e-12 * tri.area());

        let seg = convex_hull(&pts(&[(1.0, 1.0), (4.0, 5.0)])).unwrap();
        assert!((seg.cauchy_perimeter(&quad).unwrap().value - 10.0).abs() < 1e-12);
        assert!(seg.cauchy_area(&quad).unwrap().value.abs() < 1e-12);

        let dot = convex_hull(&pts(&[(1.0, 2.0)])).unwrap();
        assert!(dot.cauchy_perimeter(&quad).unwrap().value.abs() < 1e-12);
        assert!(dot.cauchy_area(&quad).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn octagon_filter_keeps_all_extreme_points() {
        // Points on a circle plus a dense interior cloud.
        let mut cloud: Vec<Point> = (0..50)
            .map(|k| {
                let a = k as f64 * TAU / 50.0;
                Point::new(a.cos(), a.sin())
            })
            .collect();
        for i in 0..40 {
            for j in 0..40 {
                cloud.push(Point::new(i as f64 / 40.0 - 0.5, j as f64 / 40.0 - 0.5));
            }
        }
        let filtered = octagon_filter(&cloud);
        assert!(filtered.len() < cloud.len() / 4);
        assert_eq!(monotone_chain(filtered), monotone_chain(cloud.clone()));
        assert_eq!(convex_hull(&cloud).unwrap().vertices().len(), 50);
    }
}
