//! Convex polygons: the foci polygon K and forbidden regions.

use serde::{Deserialize, Serialize};

use crate::vec2::Vec2;

/// Closed convex polygon with counterclockwise vertices. An empty vertex list
/// is the empty region.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Vec2>,
}

/// Oriented line `{p : (p − point) × dir ...}`; the kept side is the left.
#[derive(Clone, Copy, Debug)]
pub struct HalfPlane {
    pub point: Vec2,
    pub dir: Vec2,
}

impl HalfPlane {
    /// Signed distance, positive on the left of the directed line.
    #[inline]
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        self.dir.cross(p - self.point) / self.dir.hypot()
    }
}

impl ConvexPolygon {
    /// Wraps the vertices, reversing them if they are given clockwise.
    pub fn new(mut vertices: Vec<Vec2>) -> ConvexPolygon {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        ConvexPolygon { vertices }
    }

    pub fn rect(lo: Vec2, hi: Vec2) -> ConvexPolygon {
        ConvexPolygon {
            vertices: vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3 || self.area() <= 0.0
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Whether every turn is left (or straight) and the polygon is closed.
    pub fn is_convex(&self, tol: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -tol
        })
    }

    /// Distance from `p` to the region (zero inside).
    pub fn distance_to(&self, p: Vec2) -> f64 {
        if self.vertices.is_empty() {
            return f64::INFINITY;
        }
        if self.contains(p, 0.0) {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Point-in-polygon test with slack `tol` (positive enlarges).
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        if self.vertices.len() < 3 {
            return false;
        }
        self.edges().all(|(a, b)| (b - a).cross(p - a) / (b - a).hypot() >= -tol)
    }

    /// Keeps the part of the polygon on the left of `h`.
    pub fn clip(&self, h: &HalfPlane) -> ConvexPolygon {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let da = h.signed_distance(a);
            let db = h.signed_distance(b);
            if da >= 0.0 {
                out.push(a);
            }
            if (da >= 0.0) != (db >= 0.0) {
                let t = da / (da - db);
                out.push(a + (b - a) * t);
            }
        }
        dedup_close(&mut out, 1e-14);
        ConvexPolygon { vertices: out }
    }

    /// Hausdorff distance between the two regions.
    pub fn hausdorff(&self, other: &ConvexPolygon) -> f64 {
        // The distance to a convex set is convex, so its maximum over a
        // polygon is attained at a vertex.
        let one = self
            .vertices
            .iter()
            .map(|&v| other.distance_to(v))
            .fold(0.0, f64::max);
        let two = other
            .vertices
            .iter()
            .map(|&v| self.distance_to(v))
            .fold(0.0, f64::max);
        one.max(two)
    }

    /// Minimum and maximum signed distance of the vertices from the line
    /// through `a` and `b` (positive on the left of `a → b`).
    pub fn line_extent(&self, a: Vec2, b: Vec2) -> (f64, f64) {
        let h = HalfPlane { point: a, dir: b - a };
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            let d = h.signed_distance(v);
            (lo.min(d), hi.max(d))
        })
    }
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.hypot2();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn dedup_close(v: &mut Vec<Vec2>, tol: f64) {
    v.dedup_by(|a, b| a.distance(*b) < tol);
    while v.len() > 1 && v[0].distance(v[v.len() - 1]) < tol {
        v.pop();
    }
}
