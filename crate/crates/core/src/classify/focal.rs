//! Focal orbits of the hexagonal table: the focal-angle law and the
//! convergence of focal trajectories to the junction triangle.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{domain, Result};
use crate::polygon::ConvexPolygon;
use crate::table::StringTable;
use crate::vec2::Vec2;

/// Convergence threshold on `|φ − π/2|` and `|s − 4|`.
pub const FOCAL_CONVERGENCE_TOL: f64 = 1e-6;

/// A chord counts as passing through a focus when the line misses it by
/// less than this.
const FOCUS_HIT_TOL: f64 = 1e-7;

/// Angle `γ` between incoming and outgoing rays at a focal bounce on arc ⌢24
/// at height `y`: `cos γ = (y² + 9)/(27 − y²)`.
pub fn focal_angle_of_height(y: f64) -> Result<f64> {
    let s3 = 3f64.sqrt();
    if !(y.abs() <= s3 + 1e-12) {
        return domain("focal_angle_of_height", format!("|y| = {} exceeds √3", y.abs()));
    }
    let y2 = (y * y).min(3.0);
    Ok(((y2 + 9.0) / (27.0 - y2)).clamp(-1.0, 1.0).acos())
}

/// Per-bounce quantities of a focal trajectory. At bounce `i` the incoming
/// chord passes through focus `A_i` and the outgoing one through `B_i`:
/// `s_i = |P_i B_i|`, `t_i = |P_i A_i|`, `α_i` is the angle at `P_i` and `φ_i`
/// the angle at `A_i` in the triangle `A_i B_i P_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocalConvergenceSeries {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Focus index (0-based) crossed by the incoming chord of each bounce.
    pub focus_in: Vec<usize>,
    /// Series index where `|φ − π/2|` and `|s − 4|` first drop below the
    /// threshold.
    pub converged_at: Option<usize>,
    /// Limiting junction triangle for this focal family.
    pub triangle: [Vec2; 3],
    /// Hausdorff distance between the last three bounce points and `triangle`.
    pub hausdorff_to_triangle: f64,
}

impl FocalConvergenceSeries {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Largest decrease of `φ` between consecutive bounces (0 if monotone).
    pub fn max_phi_decrease(&self) -> f64 {
        self.phi.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }
}

fn angle_between(u: Vec2, v: Vec2) -> f64 {
    u.cross(v).abs().atan2(u.dot(v))
}

fn nearest_focus(foci: &[Vec2], a: Vec2, b: Vec2) -> (usize, f64) {
    let dir = (b - a).normalize();
    foci.iter()
        .map(|&f| dir.cross(f - a).abs())
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty")
}

/// Extracts the convergence series of a focal trajectory on the hexagon.
///
/// The launch chord (from `trajectory.start`) must pass through a focus, and
/// successive chords must cycle through three alternate vertices of K. The
/// series stops early if a chord has drifted off its focus, which happens
/// for trajectories traced with plain reflection (see
/// [`trace_focal`](crate::dynamics::trace_focal)).
pub fn focal_convergence(table: &StringTable, trajectory: &Trajectory) -> Result<FocalConvergenceSeries> {
    if table.n != 6 {
        return domain("focal_convergence", "focal convergence is defined for the hexagon");
    }
    let b = &trajectory.bounces;
    if b.len() < 4 {
        return domain("focal_convergence", "need at least four bounces");
    }
    let foci = &table.foci;
    let mut points = Vec::with_capacity(b.len() + 1);
    points.push(trajectory.start);
    points.extend(b.iter().map(|x| x.at.point));

    let (f0, d0) = nearest_focus(foci, points[0], points[1]);
    if d0 > FOCUS_HIT_TOL {
        return domain(
            "focal_convergence",
            format!("launch chord misses every focus (closest by {d0:.3e})"),
        );
    }
    let (f1, d1) = nearest_focus(foci, points[1], points[2]);
    if d1 > FOCUS_HIT_TOL || f1 == f0 || (f1 + 6 - f0) % 2 != 0 {
        return domain("focal_convergence", "chords do not alternate between foci");
    }
    // Both junction triangles have a side through every focus; which one
    // attracts depends on the parity of the foci and the sense in which the
    // chords cycle through them.
    let parity = f0 % 2;
    let apex_parity = if (f1 + 6 - f0) % 6 == 4 { 1 - parity } else { parity };
    let tri: Vec<Vec2> = (0..6).filter(|i| i % 2 == apex_parity).map(|i| table.apexes[i]).collect();
    let triangle = [tri[0], tri[1], tri[2]];

    let mut series = FocalConvergenceSeries {
        s: vec![],
        t: vec![],
        phi: vec![],
        alpha: vec![],
        focus_in: vec![],
        converged_at: None,
        triangle,
        hausdorff_to_triangle: f64::NAN,
    };
    let mut focus_in = f0;
    let mut last = 1;
    for i in 1..points.len() - 1 {
        let (focus_out, dist) = nearest_focus(foci, points[i], points[i + 1]);
        let step = (focus_out + 6 - focus_in) % 6;
        if dist > FOCUS_HIT_TOL || step % 2 != 0 || step == 0 {
            break;
        }
        let p = points[i];
        let a = foci[focus_in];
        let bf = foci[focus_out];
        let s = p.distance(bf);
        let t = p.distance(a);
        let alpha = angle_between(a - p, bf - p);
        let phi = angle_between(bf - a, p - a);
        series.s.push(s);
        series.t.push(t);
        series.phi.push(phi);
        series.alpha.push(alpha);
        series.focus_in.push(focus_in);
        last = i;
        if series.converged_at.is_none()
            && (phi - FRAC_PI_2).abs() < FOCAL_CONVERGENCE_TOL
            && (s - 4.0).abs() < FOCAL_CONVERGENCE_TOL
        {
            series.converged_at = Some(series.s.len() - 1);
        }
        focus_in = focus_out;
    }
    if series.is_empty() {
        return domain("focal_convergence", "no focal bounce found");
    }
    let start = last.saturating_sub(2).max(1);
    let recent: Vec<Vec2> = points[start..=last].to_vec();
    series.hausdorff_to_triangle = if recent.len() == 3 {
        ConvexPolygon::new(recent).hausdorff(&ConvexPolygon::new(triangle.to_vec()))
    } else {
        f64::INFINITY
    };
    Ok(series)
}

/// `s = (4√3 − 6 cos φ)/(√3 − cos φ)`, the chord-side length as a function of φ.
pub fn chord_law(phi: f64) -> f64 {
    let s3 = 3f64.sqrt();
    (4.0 * s3 - 6.0 * phi.cos()) / (s3 - phi.cos())
}
