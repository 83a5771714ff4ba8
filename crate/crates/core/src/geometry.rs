//! Ellipse-arc kernel: evaluation, tangents, curvature, arc length and its
//! inverse, and ray/boundary intersection.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::integrate;
use crate::table::StringTable;
use crate::vec2::Vec2;

/// Slack allowed when checking that a parameter lies on an arc.
pub const PARAM_SLACK: f64 = 1e-12;

/// Default minimum ray advance, excluding the departure point.
pub const DEFAULT_T_MIN: f64 = 1e-9;

const ARC_LENGTH_REL_TOL: f64 = 1e-13;

/// One elliptical piece of the table boundary.
///
/// In the canonical frame the ellipse is `x = a cos t`, `y = b sin t` with the
/// major axis along `x`. The table frame is reached by rotating by `rotation`
/// and translating by `center`; the canonical `y` axis points out of the
/// table, so increasing `t` runs counterclockwise around the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseArc {
    pub arc_id: usize,
    /// 1-based labels of the two foci, as in arc ⌢ij.
    pub foci_labels: (usize, usize),
    pub focus_a: Vec2,
    pub focus_b: Vec2,
    pub focal_sum: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub center: Vec2,
    pub rotation: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl EllipseArc {
    /// Builds an arc from its foci, focal-distance sum, outward direction and
    /// the two endpoints (in any order).
    pub(crate) fn from_foci(
        arc_id: usize,
        foci_labels: (usize, usize),
        focus_a: Vec2,
        focus_b: Vec2,
        focal_sum: f64,
        outward: Vec2,
        endpoints: (Vec2, Vec2),
    ) -> Result<EllipseArc> {
        let half_focal = 0.5 * focus_a.distance(focus_b);
        let semi_major = 0.5 * focal_sum;
        if semi_major <= half_focal {
            return domain("EllipseArc", "focal sum must exceed the focal distance");
        }
        let semi_minor = ((semi_major - half_focal) * (semi_major + half_focal)).sqrt();
        let center = (focus_a + focus_b) * 0.5;
        let axis = focus_b - focus_a;
        // Outward minor direction, perpendicular to the focal axis.
        let mut minor = axis.perp().normalize();
        if minor.dot(outward) < 0.0 {
            minor = -minor;
        }
        let major = Vec2::new(minor.y, -minor.x);
        let mut arc = EllipseArc {
            arc_id,
            foci_labels,
            focus_a,
            focus_b,
            focal_sum,
            semi_major,
            semi_minor,
            center,
            rotation: major.y.atan2(major.x),
            t_start: 0.0,
            t_end: 0.0,
        };
        let t0 = arc.param_of(endpoints.0);
        let t1 = arc.param_of(endpoints.1);
        arc.t_start = t0.min(t1);
        arc.t_end = t0.max(t1);
        Ok(arc)
    }

    /// Unit vector of the major axis in the table frame.
    #[inline]
    pub fn major_dir(&self) -> Vec2 {
        Vec2::from_angle(self.rotation)
    }

    /// Unit vector of the minor axis (pointing out of the table).
    #[inline]
    pub fn minor_dir(&self) -> Vec2 {
        self.major_dir().perp()
    }

    #[inline]
    pub fn t_mid(&self) -> f64 {
        0.5 * (self.t_start + self.t_end)
    }

    #[inline]
    pub fn contains_param(&self, t: f64) -> bool {
        t >= self.t_start - PARAM_SLACK && t <= self.t_end + PARAM_SLACK
    }

    fn check(&self, op: &'static str, t: f64) -> Result<()> {
        if self.contains_param(t) {
            Ok(())
        } else {
            domain(
                op,
                format!(
                    "t = {t} outside arc {} range [{}, {}]",
                    self.arc_id, self.t_start, self.t_end
                ),
            )
        }
    }

    /// Canonical-frame coordinates of a table-frame point.
    #[inline]
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let u = self.major_dir();
        let d = p - self.center;
        Vec2::new(d.dot(u), d.dot(u.perp()))
    }

    /// Eccentric-anomaly parameter of the ellipse point nearest in angle to `p`.
    #[inline]
    pub fn param_of(&self, p: Vec2) -> f64 {
        let l = self.to_local(p);
        (l.y / self.semi_minor).atan2(l.x / self.semi_major)
    }

    /// Value of the normalized implicit equation `(x/a)² + (y/b)² − 1`.
    #[inline]
    pub fn implicit(&self, p: Vec2) -> f64 {
        let l = self.to_local(p);
        (l.x / self.semi_major).powi(2) + (l.y / self.semi_minor).powi(2) - 1.0
    }

    /// `|p − F_a| + |p − F_b| − focal_sum`.
    #[inline]
    pub fn focal_residual(&self, p: Vec2) -> f64 {
        p.distance(self.focus_a) + p.distance(self.focus_b) - self.focal_sum
    }

    #[inline]
    pub fn point_at(&self, t: f64) -> Vec2 {
        let u = self.major_dir();
        let (s, c) = t.sin_cos();
        self.center + u * (self.semi_major * c) + u.perp() * (self.semi_minor * s)
    }

    #[inline]
    pub(crate) fn derivative_at(&self, t: f64) -> Vec2 {
        let u = self.major_dir();
        let (s, c) = t.sin_cos();
        u * (-self.semi_major * s) + u.perp() * (self.semi_minor * c)
    }

    #[inline]
    pub(crate) fn second_derivative_at(&self, t: f64) -> Vec2 {
        let u = self.major_dir();
        let (s, c) = t.sin_cos();
        u * (-self.semi_major * c) - u.perp() * (self.semi_minor * s)
    }

    #[inline]
    pub fn speed_at(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        ((self.semi_major * s).powi(2) + (self.semi_minor * c).powi(2)).sqrt()
    }

    #[inline]
    pub fn tangent_at(&self, t: f64) -> Vec2 {
        self.derivative_at(t).normalize()
    }

    #[inline]
    pub fn curvature_at(&self, t: f64) -> f64 {
        let sp = self.speed_at(t);
        self.semi_major * self.semi_minor / (sp * sp * sp)
    }

    pub fn point(&self, t: f64) -> Result<Vec2> {
        self.check("arc_point", t)?;
        Ok(self.point_at(t))
    }

    /// Unit tangent, oriented counterclockwise around the table.
    pub fn tangent(&self, t: f64) -> Result<Vec2> {
        self.check("arc_tangent", t)?;
        Ok(self.tangent_at(t))
    }

    pub fn curvature(&self, t: f64) -> Result<f64> {
        self.check("arc_curvature", t)?;
        Ok(self.curvature_at(t))
    }

    /// Signed length of the arc between two parameters (no range check).
    pub(crate) fn signed_length(&self, t0: f64, t1: f64) -> f64 {
        integrate(|t| self.speed_at(t), t0, t1, ARC_LENGTH_REL_TOL).value
    }

    /// Length of the arc between `t0 ≤ t1`, both inside the arc's range.
    pub fn length(&self, t0: f64, t1: f64) -> Result<f64> {
        self.check("arc_length", t0)?;
        self.check("arc_length", t1)?;
        if t1 < t0 {
            return domain("arc_length", format!("inverted interval [{t0}, {t1}]"));
        }
        Ok(self.signed_length(t0, t1))
    }

    /// Roots of the ray `origin + λ·dir` with the full ellipse, smallest first.
    pub(crate) fn ray_roots(&self, origin: Vec2, dir: Vec2) -> Option<(f64, f64)> {
        let o = self.to_local(origin);
        let u = self.major_dir();
        let d = Vec2::new(dir.dot(u), dir.dot(u.perp()));
        let ia2 = 1.0 / (self.semi_major * self.semi_major);
        let ib2 = 1.0 / (self.semi_minor * self.semi_minor);
        let qa = d.x * d.x * ia2 + d.y * d.y * ib2;
        let qb = 2.0 * (o.x * d.x * ia2 + o.y * d.y * ib2);
        let qc = o.x * o.x * ia2 + o.y * o.y * ib2 - 1.0;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let q = -0.5 * (qb + qb.signum() * disc.sqrt());
        let (r0, r1) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / qa, qc / q)
        };
        Some((r0.min(r1), r0.max(r1)))
    }
}

/// A point on the table boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub arc_id: usize,
    pub t: f64,
    pub point: Vec2,
    /// Arc length from the origin point O, counterclockwise, in `[0, L)`.
    pub s: f64,
}

impl StringTable {
    /// Point on arc `arc_id` at parameter `t`, with its arc-length coordinate.
    pub fn boundary_point(&self, arc_id: usize, t: f64) -> Result<BoundaryPoint> {
        let arc = self.arc(arc_id)?;
        let point = arc.point(t)?;
        Ok(BoundaryPoint {
            arc_id,
            t,
            point,
            s: self.arc_length_coordinate(arc_id, t),
        })
    }

    /// Arc-length coordinate `s ∈ [0, L)` of arc `arc_id` at parameter `t`.
    ///
    /// O sits at the midpoint of arc 0 and every arc has the same length, so
    /// arc `i` covers `[i·A − A/2, i·A + A/2)` modulo `L`.
    pub fn arc_length_coordinate(&self, arc_id: usize, t: f64) -> f64 {
        let arc = &self.arcs[arc_id];
        let s = arc_id as f64 * self.arc_len + arc.signed_length(FRAC_PI_2, t);
        let s = s.rem_euclid(self.boundary_length);
        // rem_euclid can round up to L itself.
        if s >= self.boundary_length {
            0.0
        } else {
            s
        }
    }

    /// Boundary point at arc-length coordinate `s ∈ [0, L)`.
    pub fn invert_arc_length(&self, s: f64) -> Result<BoundaryPoint> {
        if !(0.0..self.boundary_length).contains(&s) {
            return domain(
                "invert_arc_length",
                format!("s = {s} outside [0, {})", self.boundary_length),
            );
        }
        Ok(self.point_at_s(s))
    }

    /// Same as [`invert_arc_length`](Self::invert_arc_length) but accepts any
    /// real `s`, wrapping it onto `[0, L)`.
    pub fn point_at_s(&self, s: f64) -> BoundaryPoint {
        let big_l = self.boundary_length;
        let mut s = s.rem_euclid(big_l);
        if s >= big_l {
            s = 0.0;
        }
        let a = self.arc_len;
        let mut arc_id = ((s / a) + 0.5).floor() as usize;
        let mut local = s - arc_id as f64 * a;
        if arc_id >= self.n {
            arc_id -= self.n;
            local = s - big_l;
        }
        let arc = &self.arcs[arc_id];
        let mid = FRAC_PI_2;
        let mut t = mid + local / arc.speed_at(mid);
        let mut len = arc.signed_length(mid, t);
        for _ in 0..50 {
            let dt = (local - len) / arc.speed_at(t);
            let t_new = (t + dt).clamp(arc.t_start, arc.t_end);
            len += arc.signed_length(t, t_new);
            let moved = (t_new - t).abs();
            t = t_new;
            if moved < 1e-15 {
                break;
            }
        }
        BoundaryPoint {
            arc_id,
            t,
            point: arc.point_at(t),
            s,
        }
    }

    /// First boundary point hit by the ray `origin + λ·direction`, `λ > t_min`.
    pub fn ray_boundary_intersection(
        &self,
        origin: Vec2,
        direction: Vec2,
        t_min: f64,
    ) -> Result<BoundaryPoint> {
        let (arc_id, t, _) = self.ray_hit(origin, direction, t_min)?;
        Ok(BoundaryPoint {
            arc_id,
            t,
            point: self.arcs[arc_id].point_at(t),
            s: self.arc_length_coordinate(arc_id, t),
        })
    }

    /// Ray hit without the arc-length coordinate: `(arc_id, t, λ)`.
    pub(crate) fn ray_hit(&self, origin: Vec2, direction: Vec2, t_min: f64) -> Result<(usize, f64, f64)> {
        if !origin.is_finite() || !direction.is_finite() {
            return Err(Error::Integrity(format!(
                "non-finite ray origin {origin:?} or direction {direction:?}"
            )));
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for arc in &self.arcs {
            let Some((r0, r1)) = arc.ray_roots(origin, direction) else {
                continue;
            };
            for lambda in [r0, r1] {
                if lambda <= t_min {
                    continue;
                }
                if best.is_some_and(|(_, _, l)| l <= lambda) {
                    continue;
                }
                let t = arc.param_of(origin + direction * lambda);
                if arc.contains_param(t) {
                    best = Some((arc.arc_id, t.clamp(arc.t_start, arc.t_end), lambda));
                }
            }
        }
        let Some((arc_id, t, lambda)) = best else {
            return Err(Error::Integrity(format!(
                "ray from {origin:?} along {direction:?} does not meet the boundary"
            )));
        };
        let residual = self.arcs[arc_id].implicit(origin + direction * lambda);
        if residual.abs() > 1e-10 {
            return Err(Error::Integrity(format!(
                "intersection residual {residual:e} on arc {arc_id}"
            )));
        }
        Ok((arc_id, t, lambda))
    }
}
