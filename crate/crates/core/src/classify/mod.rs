//! Orbit taxonomy relative to the foci polygon K.
//!
//! Every chord of a trajectory either lies on a supporting line of K (focal),
//! cuts through K (inner) or misses it (outer), and the billiard map
//! preserves the kind. This module classifies chords and whole orbits, and
//! hosts the focal-orbit diagnostics and forbidden-region geometry.

mod focal;
mod forbidden;

pub use focal::{chord_law, focal_angle_of_height, focal_convergence, FocalConvergenceSeries, FOCAL_CONVERGENCE_TOL};
pub use forbidden::{forbidden_region, is_caustic, CausticReport, ForbiddenRegion, Orientation};

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{domain, Result};
use crate::polygon::{ConvexPolygon, HalfPlane};
use crate::vec2::Vec2;

/// Default supporting-line tolerance in table units.
pub const TOL_SUPPORT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentTag {
    /// On a supporting line of K.
    Supporting,
    /// Crosses the interior of K.
    Intersecting,
    /// Misses K.
    Disjoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentClass {
    pub tag: SegmentTag,
    /// Index into the vertex list of K of the vertex closest to the line.
    pub nearest_vertex: usize,
    /// Distance from that vertex to the line.
    pub vertex_distance: f64,
    /// A point of the line inside K, for intersecting chords.
    pub interior_point: Option<Vec2>,
}

/// Classifies the chord `a → b` against the convex polygon `k`.
pub fn classify_segment(a: Vec2, b: Vec2, k: &ConvexPolygon, tol_support: f64) -> Result<SegmentClass> {
    let dir = b - a;
    let len = dir.hypot();
    if !(len > 1e-14) {
        return domain("classify_segment", "degenerate segment");
    }
    if k.vertices.is_empty() {
        return domain("classify_segment", "empty polygon");
    }
    let line = HalfPlane { point: a, dir };
    let dists: Vec<f64> = k.vertices.iter().map(|&v| line.signed_distance(v)).collect();
    let (nearest_vertex, vertex_distance) = dists
        .iter()
        .map(|d| d.abs())
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty");
    let lo = dists.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = dists.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let tag = if lo < -tol_support && hi > tol_support {
        SegmentTag::Intersecting
    } else if vertex_distance < tol_support {
        SegmentTag::Supporting
    } else {
        SegmentTag::Disjoint
    };
    let interior_point = (tag == SegmentTag::Intersecting).then(|| {
        // Where the line crosses K's boundary: the two sign changes of the
        // vertex distances. Their midpoint is inside K.
        let n = dists.len();
        let mut hits = Vec::with_capacity(2);
        for i in 0..n {
            let j = (i + 1) % n;
            if (dists[i] >= 0.0) != (dists[j] >= 0.0) {
                let t = dists[i] / (dists[i] - dists[j]);
                hits.push(k.vertices[i] + (k.vertices[j] - k.vertices[i]) * t);
            }
        }
        (hits[0] + hits[hits.len() - 1]) * 0.5
    });
    Ok(SegmentClass {
        tag,
        nearest_vertex,
        vertex_distance,
        interior_point,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitTag {
    Focal,
    Inner,
    Outer,
    /// Chords of different kinds: a numerical fault.
    MixedError,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub tag: OrbitTag,
    pub segments: Vec<SegmentClass>,
    /// Whether all chords share one tag.
    pub consistent: bool,
    /// First chord whose tag differs from chord 0.
    pub offending: Option<usize>,
    /// Chord counts per tag: supporting, intersecting, disjoint.
    pub histogram: [usize; 3],
    pub tol_support: f64,
}

/// Classifies every chord between consecutive bounces of `trajectory`.
pub fn classify_orbit(trajectory: &Trajectory, k: &ConvexPolygon, tol_support: f64) -> Result<OrbitClass> {
    let chords = trajectory.chords();
    if chords.is_empty() {
        return domain("classify_orbit", "trajectory has no bounce");
    }
    let segments = chords
        .iter()
        .map(|&(a, b)| classify_segment(a, b, k, tol_support))
        .collect::<Result<Vec<_>>>()?;
    let mut histogram = [0usize; 3];
    for s in &segments {
        histogram[match s.tag {
            SegmentTag::Supporting => 0,
            SegmentTag::Intersecting => 1,
            SegmentTag::Disjoint => 2,
        }] += 1;
    }
    let first = segments[0].tag;
    let offending = segments.iter().position(|s| s.tag != first);
    let tag = match (offending, first) {
        (Some(_), _) => OrbitTag::MixedError,
        (None, SegmentTag::Supporting) => OrbitTag::Focal,
        (None, SegmentTag::Intersecting) => OrbitTag::Inner,
        (None, SegmentTag::Disjoint) => OrbitTag::Outer,
    };
    Ok(OrbitClass {
        tag,
        segments,
        consistent: offending.is_none(),
        offending,
        histogram,
        tol_support,
    })
}
