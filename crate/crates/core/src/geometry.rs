//! Planar geometry helpers shared by the mesh, element and recovery code.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Twice the signed area (positive for counter-clockwise vertex order).
pub fn signed_area2(poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum()
}

pub fn signed_area(poly: &[Point2]) -> f64 {
    0.5 * signed_area2(poly)
}

/// Area and area centroid of a simple polygon.
///
/// Coordinates are shifted to the first vertex before summing so that
/// polygons far from the origin keep full relative precision.
pub fn polygon_area_centroid(poly: &[Point2]) -> Result<(f64, Point2)> {
    if poly.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "polygon has {} vertices, need at least 3",
            poly.len()
        )));
    }
    let origin = poly[0];
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    let n = poly.len();
    for i in 0..n {
        let p = poly[i] - origin;
        let q = poly[(i + 1) % n] - origin;
        let c = p.cross(q);
        a2 += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    let diam = bounding_diameter(poly);
    if a2.abs() <= 1e-14 * diam * diam {
        return Err(Error::DegenerateGeometry(format!(
            "polygon area {} is below tolerance",
            0.5 * a2
        )));
    }
    let centroid = Point2::new(origin.x + cx / (3.0 * a2), origin.y + cy / (3.0 * a2));
    Ok((0.5 * a2, centroid))
}

pub fn bounding_box(points: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

pub fn bounding_diameter(points: &[Point2]) -> f64 {
    let (lo, hi) = bounding_box(points);
    (hi - lo).norm()
}

/// Even-odd point-in-polygon test. Points on the boundary may go either way.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// True when `p` lies on the open segment `a`-`b` (within `tol`, away from the endpoints).
pub fn on_open_segment(p: Point2, a: Point2, b: Point2, tol: f64) -> bool {
    let d = b - a;
    let len = d.norm();
    if len <= tol {
        return false;
    }
    let t = (p - a).dot(d) / (len * len);
    if t * len <= tol || (1.0 - t) * len <= tol {
        return false;
    }
    (d.cross(p - a) / len).abs() <= tol
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Proper or improper intersection of closed segments `p1p2` and `q1q2`.
pub fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2, tol: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    point_segment_distance(p1, q1, q2) <= tol
        || point_segment_distance(p2, q1, q2) <= tol
        || point_segment_distance(q1, p1, p2) <= tol
        || point_segment_distance(q2, p1, p2) <= tol
}

/// Checks that no two non-adjacent edges of the polygon touch.
pub fn is_simple(poly: &[Point2], tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a1, a2) = (poly[i], poly[(i + 1) % n]);
        if a1.dist(a2) <= tol {
            return false;
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2, tol) {
                return false;
            }
        }
    }
    // Consecutive edges folding back onto each other.
    for i in 0..n {
        let a = poly[(i + n - 1) % n];
        let b = poly[i];
        let c = poly[(i + 1) % n];
        let u = b - a;
        let v = c - b;
        if u.cross(v).abs() <= tol * (u.norm() + v.norm()) && u.dot(v) < 0.0 {
            return false;
        }
    }
    true
}

/// Visibility of the whole boundary from `center`: `center` must lie strictly
/// left of every edge of the counter-clockwise polygon. This is the positive
/// boundary Jacobian condition of the scaled boundary element.
pub fn is_star_convex_from(poly: &[Point2], center: Point2, tol: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let len = a.dist(b);
        len > 0.0 && (b - a).cross(center - a) / len > tol
    })
}

/// Clips `subject` against the half-plane `{p : (p - origin) x dir >= 0}` (left of the line).
pub fn clip_half_plane(subject: &[Point2], origin: Point2, dir: Point2) -> Vec<Point2> {
    let side = |p: Point2| dir.cross(p - origin);
    let n = subject.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let cur = subject[i];
        let next = subject[(i + 1) % n];
        let sc = side(cur);
        let sn = side(next);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc >= 0.0) != (sn >= 0.0) {
            let t = sc / (sc - sn);
            out.push(cur.lerp(next, t));
        }
    }
    out
}

/// Sutherland-Hodgman clip of an arbitrary polygon against a convex CCW window.
pub fn clip_convex(subject: &[Point2], window: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    let n = window.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = window[i];
        let b = window[(i + 1) % n];
        out = clip_half_plane(&out, a, b - a);
    }
    out
}

pub fn is_convex_ccw(poly: &[Point2], tol: f64) -> bool {
    let n = poly.len();
    signed_area2(poly) > 0.0
        && (0..n).all(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let c = poly[(i + 2) % n];
            (b - a).cross(c - b) >= -tol * (b - a).norm() * (c - b).norm()
        })
}

/// Removes consecutive duplicates (within `tol`), including a closing duplicate.
pub fn dedup_ring(poly: &[Point2], tol: f64) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(poly.len());
    for &p in poly {
        if out.last().is_none_or(|q| q.dist(p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(*out.last().unwrap()) <= tol {
        out.pop();
    }
    out
}

/// Drops vertices that lie on the straight line through their neighbours.
pub fn drop_collinear(poly: &[Point2], tol: f64) -> Vec<Point2> {
    let mut pts = poly.to_vec();
    loop {
        let n = pts.len();
        if n <= 3 {
            return pts;
        }
        let idx = (0..n).find(|&i| {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            let ac = c - a;
            let len = ac.norm();
            len > 0.0 && (ac.cross(b - a) / len).abs() <= tol && (b - a).dot(c - b) >= 0.0
        });
        match idx {
            Some(i) => {
                pts.remove(i);
            }
            None => return pts,
        }
    }
}
