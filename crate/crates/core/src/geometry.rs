//! Convex-polygon boundary geometry and the circle abstraction.
//!
//! The environment is a strictly convex polygon with counter-clockwise
//! vertices. Robots live on the boundary; a reference point `o` strictly
//! inside the polygon (the target or an estimate of it) induces a bijection
//! between boundary points and angles on the unit circle: a boundary point
//! `p` maps to the direction angle of `p - o`, and an angle maps back by
//! casting a ray from `o` and intersecting the boundary.
//!
//! Invariants kept by this module:
//! - polygons are strictly convex, counter-clockwise, with no repeated or
//!   collinear vertices;
//! - the angle map and its inverse round-trip to within `EPS` for any
//!   strictly interior reference point;
//! - walking the boundary counter-clockwise corresponds to increasing angle
//!   (the circular order of boundary points is preserved on the circle).

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Absolute tolerance for geometric predicates and round-trip checks.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("repeated vertex at index {0}")]
    RepeatedVertex(usize),
    #[error("vertices not strictly convex counter-clockwise (turn at vertex {0})")]
    NotStrictlyConvex(usize),
    #[error("reference point ({0}, {1}) is not strictly inside the polygon")]
    CenterOutsidePolygon(f64, f64),
    #[error("point coincides with the reference center")]
    DegeneratePoint,
    #[error("edge index {0} out of range for polygon with {1} edges")]
    EdgeOutOfRange(usize, usize),
}

/// An angle in radians on the unit circle.
///
/// Stored raw; [`Angle::normalized`] maps into `[0, 2*pi)`. The circular
/// helpers avoid the usual wraparound bugs when comparing headings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angle(pub f64);

impl Angle {
    /// The representative of this angle in `[0, 2*pi)`.
    pub fn normalized(self) -> f64 {
        let r = self.0.rem_euclid(TAU);
        if r >= TAU {
            0.0
        } else {
            r
        }
    }

    /// Signed circular difference `self - other`, wrapped into `(-pi, pi]`.
    pub fn signed_diff(self, other: Angle) -> f64 {
        let d = (self.0 - other.0).rem_euclid(TAU);
        if d > PI {
            d - TAU
        } else {
            d
        }
    }

    /// Counter-clockwise distance from `from` to `self`, in `[0, 2*pi)`.
    pub fn ccw_delta(self, from: Angle) -> f64 {
        let d = (self.0 - from.0).rem_euclid(TAU);
        if d >= TAU {
            0.0
        } else {
            d
        }
    }
}

/// A point on the polygon boundary: edge index plus normalized parameter
/// `t` in `[0, 1]` along that edge, with the Cartesian point cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub edge: usize,
    pub t: f64,
    pub point: Point2<f64>,
}

/// Direction of travel along the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ccw,
    Cw,
}

/// A strictly convex polygon with counter-clockwise vertices.
///
/// Construction validates convexity; edge lengths and cumulative arclengths
/// are precomputed so boundary walks are O(1) amortized.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2<f64>>,
    /// cum_len[i] = arclength from vertex 0 to vertex i; last entry is the
    /// full perimeter.
    cum_len: Vec<f64>,
}

impl ConvexPolygon {
    /// Validates and builds a polygon. Vertices must be counter-clockwise,
    /// pairwise distinct, and every turn strictly convex (no collinear
    /// triples).
    pub fn new(vertices: Vec<Point2<f64>>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            if (b - a).norm() < 1e-12 {
                return Err(GeometryError::RepeatedVertex(i));
            }
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            // sin of the turn angle; must be strictly positive for a ccw
            // convex turn.
            let cross = e1.x * e2.y - e1.y * e2.x;
            if cross <= 1e-10 * e1.norm() * e2.norm() {
                return Err(GeometryError::NotStrictlyConvex((i + 1) % n));
            }
        }
        let mut cum_len = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cum_len.push(0.0);
        for i in 0..n {
            acc += (vertices[(i + 1) % n] - vertices[i]).norm();
            cum_len.push(acc);
        }
        Ok(Self { vertices, cum_len })
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn n_edges(&self) -> usize {
        self.vertices.len()
    }

    /// Endpoints of edge `i` (from vertex `i` to vertex `i+1`).
    pub fn edge(&self, i: usize) -> (Point2<f64>, Point2<f64>) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        self.cum_len[i + 1] - self.cum_len[i]
    }

    pub fn shortest_edge(&self) -> f64 {
        (0..self.n_edges())
            .map(|i| self.edge_length(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total boundary length.
    pub fn perimeter(&self) -> f64 {
        *self.cum_len.last().unwrap()
    }

    /// Area centroid (guaranteed interior for a convex polygon).
    pub fn centroid(&self) -> Point2<f64> {
        let mut area2 = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a.x * b.y - b.x * a.y;
            area2 += w;
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        Point2::new(cx / (3.0 * area2), cy / (3.0 * area2))
    }

    /// True when `p` lies strictly inside (distance to every edge line
    /// greater than `margin`).
    pub fn contains_interior(&self, p: &Point2<f64>, margin: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (a, b) = self.edge(i);
            let e = (b - a) / (b - a).norm();
            // signed distance to the edge line; positive on the interior
            // side for a ccw polygon.
            let d = e.x * (p.y - a.y) - e.y * (p.x - a.x);
            d > margin
        })
    }

    /// Distance from an interior point to the boundary (min over edge lines).
    pub fn distance_to_boundary(&self, p: &Point2<f64>) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (a, b) = self.edge(i);
                let e = (b - a) / (b - a).norm();
                e.x * (p.y - a.y) - e.y * (p.x - a.x)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Boundary point on edge `i` at parameter `t` in `[0, 1]`.
    pub fn boundary_point(&self, edge: usize, t: f64) -> Result<BoundaryPoint, GeometryError> {
        if edge >= self.n_edges() {
            return Err(GeometryError::EdgeOutOfRange(edge, self.n_edges()));
        }
        let (a, b) = self.edge(edge);
        Ok(BoundaryPoint {
            edge,
            t,
            point: a + (b - a) * t,
        })
    }

    /// Boundary point at arclength `s` from vertex 0 (counter-clockwise),
    /// with `s` taken modulo the perimeter.
    pub fn at_arclength(&self, s: f64) -> BoundaryPoint {
        let l = self.perimeter();
        let mut s = s.rem_euclid(l);
        if s >= l {
            s = 0.0;
        }
        // binary search over the cumulative table
        let mut lo = 0usize;
        let mut hi = self.n_edges();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if self.cum_len[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = (s - self.cum_len[lo]) / self.edge_length(lo);
        self.boundary_point(lo, t.clamp(0.0, 1.0)).unwrap()
    }

    /// Arclength from vertex 0 to a boundary point, in `[0, perimeter)`.
    pub fn arclength_of(&self, bp: &BoundaryPoint) -> f64 {
        let s = self.cum_len[bp.edge] + bp.t * self.edge_length(bp.edge);
        s.rem_euclid(self.perimeter())
    }

    /// Center and radius of the largest inscribed circle (Chebyshev center).
    ///
    /// Solved exactly: the optimum of the small linear program
    /// `max r s.t. n_i . x + r <= b_i` is a basic solution determined by
    /// three active edge constraints, so all edge triples are enumerated and
    /// the best feasible candidate returned.
    pub fn inscribed_circle(&self) -> (Point2<f64>, f64) {
        let n = self.vertices.len();
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = self.edge(i);
            let e = (b - a) / (b - a).norm();
            // outward unit normal for a ccw polygon
            let out = Vector2::new(e.y, -e.x);
            normals.push(out);
            offsets.push(out.x * a.x + out.y * a.y);
        }
        let mut best: Option<(Point2<f64>, f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let m = nalgebra::Matrix3::new(
                        normals[i].x,
                        normals[i].y,
                        1.0,
                        normals[j].x,
                        normals[j].y,
                        1.0,
                        normals[k].x,
                        normals[k].y,
                        1.0,
                    );
                    let rhs = nalgebra::Vector3::new(offsets[i], offsets[j], offsets[k]);
                    let Some(inv) = m.try_inverse() else {
                        continue;
                    };
                    let sol = inv * rhs;
                    let (x, y, r) = (sol[0], sol[1], sol[2]);
                    if !r.is_finite() || r <= 0.0 {
                        continue;
                    }
                    let feasible = (0..n)
                        .all(|m| normals[m].x * x + normals[m].y * y + r <= offsets[m] + 1e-9);
                    if feasible && best.is_none_or(|(_, br)| r > br) {
                        best = Some((Point2::new(x, y), r));
                    }
                }
            }
        }
        best.expect("valid convex polygon always has an inscribed circle")
    }

    /// Length of the longest segment contained in the polygon (its
    /// diameter). For a convex polygon this is the max pairwise vertex
    /// distance.
    pub fn longest_inner_segment(&self) -> f64 {
        let n = self.vertices.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max((self.vertices[j] - self.vertices[i]).norm());
            }
        }
        best
    }
}

/// Maps a boundary (or any non-center) point to its angle about `o`.
pub fn project_to_circle(p: &Point2<f64>, o: &Point2<f64>) -> Result<Angle, GeometryError> {
    let d = p - o;
    if d.norm() < 1e-12 {
        return Err(GeometryError::DegeneratePoint);
    }
    Ok(Angle(d.y.atan2(d.x)))
}

/// Inverse of [`project_to_circle`]: casts a ray from the strictly interior
/// reference point `o` at angle `theta` and returns the unique boundary
/// crossing.
pub fn circle_to_boundary(
    theta: Angle,
    o: &Point2<f64>,
    poly: &ConvexPolygon,
) -> Result<BoundaryPoint, GeometryError> {
    if !poly.contains_interior(o, 1e-12) {
        return Err(GeometryError::CenterOutsidePolygon(o.x, o.y));
    }
    let dir = Vector2::new(theta.0.cos(), theta.0.sin());
    let mut hit: Option<(f64, usize, f64)> = None; // (ray param, edge, t)
    for i in 0..poly.n_edges() {
        let (a, b) = poly.edge(i);
        let e = b - a;
        let rhs = a - o;
        // solve o + s*dir = a + u*e for (s, u)
        let det = e.x * dir.y - dir.x * e.y;
        if det.abs() < 1e-15 {
            continue;
        }
        let s = (rhs.x * (-e.y) - (-e.x) * rhs.y) / det;
        let u = (dir.x * rhs.y - dir.y * rhs.x) / det;
        if s > 0.0 && (-1e-9..=1.0 + 1e-9).contains(&u) {
            let u = u.clamp(0.0, 1.0);
            if hit.is_none_or(|(hs, _, _)| s < hs) {
                hit = Some((s, i, u));
            }
        }
    }
    let (_, edge, t) = hit.expect("interior ray always crosses the boundary");
    poly.boundary_point(edge, t)
}

/// Boundary path length from `a` to `b` walking in `dir`.
pub fn arc_distance(
    poly: &ConvexPolygon,
    a: &BoundaryPoint,
    b: &BoundaryPoint,
    dir: Direction,
) -> f64 {
    let l = poly.perimeter();
    let sa = poly.arclength_of(a);
    let sb = poly.arclength_of(b);
    match dir {
        Direction::Ccw => (sb - sa).rem_euclid(l),
        Direction::Cw => (sa - sb).rem_euclid(l),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn unit_square() -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point2::new(-0.5, -0.5),
            Point2::new(0.5, -0.5),
            Point2::new(0.5, 0.5),
            Point2::new(-0.5, 0.5),
        ])
        .unwrap()
    }

    fn right_triangle_345() -> ConvexPolygon {
        // legs 4 and 3, hypotenuse 5
        ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap()
    }

    /// Grid-search oracle for the inscribed circle: maximize the concave
    /// min-edge-distance function by coarse-to-fine refinement. Independent
    /// of the triple-enumeration solver.
    fn inscribed_oracle(poly: &ConvexPolygon) -> (Point2<f64>, f64) {
        let vs = poly.vertices();
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in vs {
            x0 = x0.min(v.x);
            x1 = x1.max(v.x);
            y0 = y0.min(v.y);
            y1 = y1.max(v.y);
        }
        let mut best = (Point2::new(0.0, 0.0), f64::NEG_INFINITY);
        for _round in 0..8 {
            let steps = 60;
            for ix in 0..=steps {
                for iy in 0..=steps {
                    let p = Point2::new(
                        x0 + (x1 - x0) * ix as f64 / steps as f64,
                        y0 + (y1 - y0) * iy as f64 / steps as f64,
                    );
                    let d = poly.distance_to_boundary(&p);
                    if d > best.1 {
                        best = (p, d);
                    }
                }
            }
            // generous window around the incumbent: the objective is concave
            // but can be flat, so the coarse argmax may sit several cells
            // from the true one
            let wx = (x1 - x0) * 0.2;
            let wy = (y1 - y0) * 0.2;
            x0 = best.0.x - wx;
            x1 = best.0.x + wx;
            y0 = best.0.y - wy;
            y1 = best.0.y + wy;
        }
        best
    }

    fn random_convex_polygon(rng_seed: u64, n_points: usize, scale: f64) -> ConvexPolygon {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
        loop {
            let pts: Vec<Point2<f64>> = (0..n_points)
                .map(|_| {
                    Point2::new(
                        rng.gen_range(-scale..scale),
                        rng.gen_range(-scale..scale),
                    )
                })
                .collect();
            let hull = convex_hull(&pts);
            if hull.len() >= 4 {
                if let Ok(p) = ConvexPolygon::new(hull) {
                    return p;
                }
            }
        }
    }

    /// Andrew's monotone chain, used only as test scaffolding.
    pub(crate) fn convex_hull(pts: &[Point2<f64>]) -> Vec<Point2<f64>> {
        let mut pts: Vec<Point2<f64>> = pts.to_vec();
        pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
        let cross = |o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>| {
            (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
        };
        let mut lower: Vec<Point2<f64>> = Vec::new();
        for p in &pts {
            while lower.len() >= 2
                && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-12
            {
                lower.pop();
            }
            lower.push(*p);
        }
        let mut upper: Vec<Point2<f64>> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2
                && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-12
            {
                upper.pop();
            }
            upper.push(*p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        lower
    }

    #[test]
    fn rejects_too_few_vertices() {
        let r = ConvexPolygon::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        assert_eq!(r.unwrap_err(), GeometryError::TooFewVertices(2));
    }

    #[test]
    fn rejects_clockwise_winding() {
        let r = ConvexPolygon::new(vec![
            Point2::new(-0.5, -0.5),
            Point2::new(-0.5, 0.5),
            Point2::new(0.5, 0.5),
            Point2::new(0.5, -0.5),
        ]);
        assert!(matches!(r, Err(GeometryError::NotStrictlyConvex(_))));
    }

    #[test]
    fn rejects_collinear_vertex() {
        let r = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 1.0),
        ]);
        assert!(matches!(r, Err(GeometryError::NotStrictlyConvex(_))));
    }

    #[test]
    fn rejects_repeated_vertex() {
        let r = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 1.0),
        ]);
        assert_eq!(r.unwrap_err(), GeometryError::RepeatedVertex(0));
    }

    #[test]
    fn angle_normalization_and_diffs() {
        assert_relative_eq!(Angle(-PI / 2.0).normalized(), 1.5 * PI, epsilon = 1e-12);
        assert_relative_eq!(Angle(TAU + 0.25).normalized(), 0.25, epsilon = 1e-12);
        assert_eq!(Angle(-1e-17).normalized().partial_cmp(&TAU), Some(std::cmp::Ordering::Less));
        // signed difference straddling the wrap
        assert_relative_eq!(
            Angle(0.1).signed_diff(Angle(TAU - 0.1)),
            0.2,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            Angle(TAU - 0.1).signed_diff(Angle(0.1)),
            -0.2,
            epsilon = 1e-12
        );
        assert_relative_eq!(Angle(PI).signed_diff(Angle(0.0)), PI, epsilon = 1e-12);
        assert_relative_eq!(Angle(0.5).ccw_delta(Angle(6.0)), 0.5 + TAU - 6.0, epsilon = 1e-12);
    }

    #[test]
    fn projection_axis_directions() {
        let o = Point2::new(0.0, 0.0);
        let th = |x, y| project_to_circle(&Point2::new(x, y), &o).unwrap().normalized();
        assert_relative_eq!(th(1.0, 0.0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(th(0.0, 1.0), PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(th(-1.0, -1.0), 1.25 * PI, epsilon = 1e-12);
        assert_eq!(
            project_to_circle(&o, &o).unwrap_err(),
            GeometryError::DegeneratePoint
        );
    }

    #[test]
    fn ray_cast_square_axis_and_corner() {
        let sq = unit_square();
        let o = Point2::new(0.0, 0.0);
        let bp = circle_to_boundary(Angle(0.0), &o, &sq).unwrap();
        assert_relative_eq!(bp.point.x, 0.5, epsilon = 1e-12);
        assert_relative_eq!(bp.point.y, 0.0, epsilon = 1e-12);
        let corner = circle_to_boundary(Angle(PI / 4.0), &o, &sq).unwrap();
        assert_relative_eq!(corner.point.x, 0.5, epsilon = 1e-9);
        assert_relative_eq!(corner.point.y, 0.5, epsilon = 1e-9);
        // center on the boundary is rejected
        let r = circle_to_boundary(Angle(0.0), &Point2::new(0.5, 0.0), &sq);
        assert!(matches!(r, Err(GeometryError::CenterOutsidePolygon(_, _))));
    }

    #[test]
    fn perimeter_of_known_shapes() {
        assert_relative_eq!(unit_square().perimeter(), 4.0, epsilon = 1e-12);
        assert_relative_eq!(right_triangle_345().perimeter(), 12.0, epsilon = 1e-12);
    }

    #[test]
    fn inscribed_circle_known_shapes() {
        // square: center at the middle, radius half the side
        let (c, r) = unit_square().inscribed_circle();
        assert_relative_eq!(r, 0.5, epsilon = 1e-9);
        assert_relative_eq!(c.x, 0.0, epsilon = 1e-9);
        assert_relative_eq!(c.y, 0.0, epsilon = 1e-9);
        // right 3-4-5 triangle: inradius (a+b-c)/2 = 1 at (1,1)
        let (c, r) = right_triangle_345().inscribed_circle();
        assert_relative_eq!(r, 1.0, epsilon = 1e-9);
        assert_relative_eq!(c.x, 1.0, epsilon = 1e-9);
        assert_relative_eq!(c.y, 1.0, epsilon = 1e-9);
        // equilateral triangle side 1: inradius 1/(2*sqrt(3))
        let eq = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3.0f64.sqrt() / 2.0),
        ])
        .unwrap();
        let (_, r) = eq.inscribed_circle();
        assert_relative_eq!(r, 1.0 / (2.0 * 3.0f64.sqrt()), epsilon = 1e-9);
    }

    #[test]
    fn inscribed_circle_matches_grid_oracle_on_random_polygons() {
        for seed in 0..5u64 {
            let poly = random_convex_polygon(1000 + seed, 12, 2.0);
            let (c, r) = poly.inscribed_circle();
            let (_, r_oracle) = inscribed_oracle(&poly);
            assert!(
                (r - r_oracle).abs() <= 1e-3,
                "inscribed radius {} differs from grid oracle {} on seed {}",
                r,
                r_oracle,
                seed
            );
            // returned center actually realizes its radius
            assert!((poly.distance_to_boundary(&c) - r).abs() <= 1e-7);
        }
    }

    #[test]
    fn longest_inner_segment_known_and_bounding() {
        assert_relative_eq!(unit_square().longest_inner_segment(), 2.0f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(right_triangle_345().longest_inner_segment(), 5.0, epsilon = 1e-12);
        // no pair of boundary points is farther apart than the reported
        // diameter
        let poly = random_convex_polygon(7, 10, 3.0);
        let d = poly.longest_inner_segment();
        let l = poly.perimeter();
        for i in 0..40 {
            for j in 0..40 {
                let a = poly.at_arclength(l * i as f64 / 40.0);
                let b = poly.at_arclength(l * j as f64 / 40.0);
                assert!((b.point - a.point).norm() <= d + 1e-9);
            }
        }
    }

    #[test]
    fn arc_distance_directions_and_total() {
        let sq = unit_square();
        let a = sq.at_arclength(0.25);
        let b = sq.at_arclength(1.0);
        assert_relative_eq!(arc_distance(&sq, &a, &b, Direction::Ccw), 0.75, epsilon = 1e-12);
        assert_relative_eq!(arc_distance(&sq, &a, &b, Direction::Cw), 3.25, epsilon = 1e-12);
        assert_relative_eq!(
            arc_distance(&sq, &a, &b, Direction::Ccw) + arc_distance(&sq, &a, &b, Direction::Cw),
            sq.perimeter(),
            epsilon = 1e-12
        );
        assert_relative_eq!(arc_distance(&sq, &a, &a, Direction::Ccw), 0.0, epsilon = 1e-12);
    }

    proptest! {
        /// angle -> boundary -> angle round-trips for random interior
        /// centers on a random polygon.
        #[test]
        fn roundtrip_angle_boundary_angle(theta in 0.0f64..TAU, cx in -0.3f64..0.3, cy in -0.3f64..0.3, seed in 0u64..20) {
            let poly = random_convex_polygon(seed, 10, 1.5);
            let (cheb, r_in) = poly.inscribed_circle();
            // keep the center well interior
            let o = Point2::new(cheb.x + cx * r_in, cheb.y + cy * r_in);
            let bp = circle_to_boundary(Angle(theta), &o, &poly).unwrap();
            let back = project_to_circle(&bp.point, &o).unwrap();
            let d = back.signed_diff(Angle(theta)).abs();
            prop_assert!(d < EPS, "round trip drifted by {}", d);
        }

        /// ccw order along the boundary maps to ccw circular order of
        /// angles: the ccw angle gaps of boundary-sorted points sum to one
        /// full turn.
        #[test]
        fn boundary_order_preserved_on_circle(seed in 0u64..20, n in 3usize..12, off in 0.0f64..1.0) {
            let poly = random_convex_polygon(100 + seed, 10, 1.5);
            let (o, _) = poly.inscribed_circle();
            let l = poly.perimeter();
            let angles: Vec<Angle> = (0..n)
                .map(|i| {
                    let s = l * ((i as f64 + off) / n as f64);
                    project_to_circle(&poly.at_arclength(s).point, &o).unwrap()
                })
                .collect();
            let total: f64 = (0..n)
                .map(|i| angles[(i + 1) % n].ccw_delta(angles[i]))
                .sum();
            prop_assert!((total - TAU).abs() < 1e-6, "gaps sum to {} not 2pi", total);
        }

        /// arclength <-> boundary point round trip
        #[test]
        fn arclength_roundtrip(seed in 0u64..10, s in 0.0f64..1.0) {
            let poly = random_convex_polygon(200 + seed, 8, 1.5);
            let l = poly.perimeter();
            let bp = poly.at_arclength(s * l);
            let s2 = poly.arclength_of(&bp);
            prop_assert!((s2 - s * l).abs() < 1e-9 || (s2 - s * l).abs() > l - 1e-9);
        }
    }
}
