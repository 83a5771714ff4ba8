//! Forbidden inner regions: the convex set no chord of a trajectory enters.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{domain, Result};
use crate::polygon::{ConvexPolygon, HalfPlane};
use crate::table::StringTable;
use crate::vec2::Vec2;

/// Side of each chord line that is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Decide from the sign of the trajectory's total turning.
    Auto,
    /// Trajectory winds counterclockwise; keep the left side of each chord.
    Ccw,
    /// Trajectory winds clockwise; keep the right side.
    Cw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForbiddenRegion {
    pub polygon: ConvexPolygon,
    /// Number of chord lines intersected so far.
    pub segment_count: usize,
    /// Resolved orientation (never `Auto`).
    pub orientation: Orientation,
}

impl ForbiddenRegion {
    /// The whole bounding box of `table`, before any chord is added.
    pub fn unbounded(table: &StringTable, orientation: Orientation) -> ForbiddenRegion {
        let (lo, hi) = table.bounding_box();
        ForbiddenRegion {
            polygon: ConvexPolygon::rect(lo, hi),
            segment_count: 0,
            orientation,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.polygon.is_empty()
    }

    /// Intersects the region with the kept half-plane of the chord `a → b`.
    pub fn add_chord(&mut self, a: Vec2, b: Vec2) {
        let dir = match self.orientation {
            Orientation::Cw => a - b,
            _ => b - a,
        };
        self.polygon = self.polygon.clip(&HalfPlane { point: a, dir });
        self.segment_count += 1;
    }

    pub fn add_trajectory(&mut self, trajectory: &Trajectory) {
        for (a, b) in trajectory.chords() {
            self.add_chord(a, b);
        }
    }
}

/// Sum of the signed turning angles between consecutive chords.
pub fn total_turning(trajectory: &Trajectory) -> f64 {
    trajectory
        .bounces
        .windows(2)
        .map(|w| {
            let (u, v) = (w[0].outgoing, w[1].outgoing);
            u.cross(v).atan2(u.dot(v))
        })
        .sum()
}

/// Intersection of the half-planes on the winding side of every chord line,
/// clipped to the table's bounding box. An empty polygon is a valid result.
pub fn forbidden_region(
    table: &StringTable,
    trajectory: &Trajectory,
    orientation: Orientation,
) -> Result<ForbiddenRegion> {
    if trajectory.bounces.len() < 4 {
        return domain("forbidden_region", "need at least three chords");
    }
    let orientation = match orientation {
        Orientation::Auto if total_turning(trajectory) < 0.0 => Orientation::Cw,
        Orientation::Auto => Orientation::Ccw,
        o => o,
    };
    let mut region = ForbiddenRegion::unbounded(table, orientation);
    region.add_trajectory(trajectory);
    Ok(region)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausticReport {
    pub is_caustic: bool,
    /// Per chord: how far its line is from supporting the region (gap when
    /// it misses, depth when it cuts through).
    pub support_gaps: Vec<f64>,
    pub max_gap: f64,
    pub tol: f64,
}

/// Whether every chord line of `trajectory` supports `region` within `tol`.
pub fn is_caustic(region: &ConvexPolygon, trajectory: &Trajectory, tol: f64) -> CausticReport {
    let support_gaps: Vec<f64> = trajectory
        .chords()
        .into_iter()
        .map(|(a, b)| {
            if region.vertices.is_empty() {
                return f64::INFINITY;
            }
            let (lo, hi) = region.line_extent(a, b);
            if lo >= 0.0 {
                lo
            } else if hi <= 0.0 {
                -hi
            } else {
                (-lo).min(hi)
            }
        })
        .collect();
    let max_gap = support_gaps.iter().cloned().fold(0.0, f64::max);
    CausticReport {
        is_caustic: !support_gaps.is_empty() && max_gap <= tol,
        support_gaps,
        max_gap,
        tol,
    }
}
