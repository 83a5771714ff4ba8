//! The billiard map: specular reflection and trajectory tracing.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{BoundaryPoint, DEFAULT_T_MIN};
use crate::table::{Frame, StringTable};
use crate::vec2::Vec2;

/// Below this inward-normal component a ray is treated as tangent.
pub const GRAZING_CUTOFF: f64 = 1e-12;

/// One boundary impact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounce {
    pub at: BoundaryPoint,
    pub incoming: Vec2,
    pub outgoing: Vec2,
    /// Angle from the counterclockwise tangent to the outgoing ray, in (0, π).
    pub theta: f64,
    /// Length of the chord to the next impact.
    pub chord_length: f64,
}

/// Identifies the table a trajectory was traced on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableId {
    pub n: usize,
    pub frame: Frame,
}

impl From<&StringTable> for TableId {
    fn from(t: &StringTable) -> TableId {
        TableId {
            n: t.n,
            frame: t.frame,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub table: TableId,
    pub start: Vec2,
    pub direction: Vec2,
    pub bounces: Vec<Bounce>,
    pub requested: usize,
    pub seed: String,
}

impl Trajectory {
    /// Straight segments of the motion as point pairs: the launch segment
    /// from `start` to the first impact, then the chords between impacts.
    pub fn chords(&self) -> Vec<(Vec2, Vec2)> {
        let mut out = Vec::with_capacity(self.bounces.len());
        if let Some(b) = self.bounces.first() {
            out.push((self.start, b.at.point));
        }
        out.extend(self.bounces.windows(2).map(|w| (w[0].at.point, w[1].at.point)));
        out
    }

    pub fn points(&self) -> Vec<Vec2> {
        self.bounces.iter().map(|b| b.at.point).collect()
    }
}

/// Specular reflection of `incoming` at boundary point `at`.
pub fn reflect(table: &StringTable, at: &BoundaryPoint, incoming: Vec2) -> Result<Vec2> {
    let arc = table.arc(at.arc_id)?;
    let normal = arc.tangent_at(at.t).perp();
    let c = incoming.dot(normal);
    if c.abs() < GRAZING_CUTOFF {
        return Err(Error::Grazing {
            bounce: 0,
            normal: c,
        });
    }
    if c > 0.0 {
        return domain("reflect", "incoming ray is leaving the table, not arriving");
    }
    Ok((incoming - normal * (2.0 * c)).normalize())
}

/// Outgoing angle measured from the counterclockwise tangent.
fn outgoing_angle(table: &StringTable, at: &BoundaryPoint, outgoing: Vec2) -> f64 {
    let tangent = table.arcs[at.arc_id].tangent_at(at.t);
    tangent.angle_to(outgoing)
}

fn trace_impl(
    table: &StringTable,
    start: Vec2,
    direction: Vec2,
    n_bounces: usize,
    seed: String,
    focal: bool,
) -> Result<Trajectory> {
    if n_bounces == 0 {
        return domain("trace", "need at least one bounce");
    }
    let len = direction.hypot();
    if !(len > 0.0) || !len.is_finite() {
        return domain("trace", "direction must be a non-zero finite vector");
    }
    let mut dir = direction / len;
    let mut bounces = Vec::with_capacity(n_bounces);
    let (mut arc_id, mut t, _) = table.ray_hit(start, dir, DEFAULT_T_MIN)?;
    for i in 0..n_bounces {
        let at = BoundaryPoint {
            arc_id,
            t,
            point: table.arcs[arc_id].point_at(t),
            s: table.arc_length_coordinate(arc_id, t),
        };
        let outgoing = reflect(table, &at, dir).map_err(|e| match e {
            Error::Grazing { normal, .. } => Error::Grazing { bounce: i, normal },
            other => other,
        })?;
        let outgoing = if focal {
            aim_at_focus(table, &at, outgoing).map_err(|e| match e {
                Error::Domain { op, msg } => Error::Domain {
                    op,
                    msg: format!("bounce {i}: {msg}"),
                },
                other => other,
            })?
        } else {
            outgoing
        };
        let (next_arc, next_t, chord) = table.ray_hit(at.point, outgoing, DEFAULT_T_MIN)?;
        bounces.push(Bounce {
            at,
            incoming: dir,
            outgoing,
            theta: outgoing_angle(table, &at, outgoing),
            chord_length: chord,
        });
        dir = outgoing;
        arc_id = next_arc;
        t = next_t;
    }
    Ok(Trajectory {
        table: table.into(),
        start,
        direction: direction / len,
        bounces,
        requested: n_bounces,
        seed,
    })
}

/// Traces `n_bounces` impacts of the ray leaving `start_point` along `direction`.
pub fn trace(table: &StringTable, start_point: Vec2, direction: Vec2, n_bounces: usize) -> Result<Trajectory> {
    let seed = format!(
        "point ({:.17e}, {:.17e}) direction ({:.17e}, {:.17e})",
        start_point.x, start_point.y, direction.x, direction.y
    );
    trace_impl(table, start_point, direction, n_bounces, seed, false)
}

/// Largest miss distance at which a reflected ray still counts as aimed at
/// a focus in [`trace_focal`].
pub const FOCAL_AIM_TOL: f64 = 1e-6;

fn aim_at_focus(table: &StringTable, at: &BoundaryPoint, outgoing: Vec2) -> Result<Vec2> {
    let arc = &table.arcs[at.arc_id];
    let miss = |f: Vec2| {
        let v = f - at.point;
        if v.dot(outgoing) <= 0.0 {
            f64::INFINITY
        } else {
            outgoing.cross(v).abs()
        }
    };
    let (focus, dist) = [arc.focus_a, arc.focus_b]
        .into_iter()
        .map(|f| (f, miss(f)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("two foci");
    if dist > FOCAL_AIM_TOL {
        return domain(
            "trace_focal",
            format!("reflected ray misses both foci of arc {} by {dist:.3e}", at.arc_id),
        );
    }
    Ok((focus - at.point).normalize())
}

/// Traces a focal trajectory: the launch ray must pass through a focus of
/// the arc it hits, and after every reflection the outgoing ray is re-aimed
/// exactly at the second focus of the arc.
///
/// Focal orbits approach a hyperbolic periodic orbit, so with plain
/// reflection rounding errors push the trajectory off the focal family
/// within a few dozen bounces. The re-aimed direction differs from the
/// reflected one only by rounding.
pub fn trace_focal(table: &StringTable, start_point: Vec2, direction: Vec2, n_bounces: usize) -> Result<Trajectory> {
    let seed = format!(
        "focal point ({:.17e}, {:.17e}) direction ({:.17e}, {:.17e})",
        start_point.x, start_point.y, direction.x, direction.y
    );
    trace_impl(table, start_point, direction, n_bounces, seed, true)
}

/// Traces from the boundary point at arc length `s`, leaving at angle `theta`
/// to the tangent. The start point itself is not recorded as a bounce.
pub fn trace_from_boundary(table: &StringTable, s: f64, theta: f64, n_bounces: usize) -> Result<Trajectory> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return domain("trace_from_boundary", format!("theta = {theta} outside (0, π)"));
    }
    let bp = table.point_at_s(s);
    let dir = table.arcs[bp.arc_id].tangent_at(bp.t).rotate(theta);
    let seed = format!("boundary s = {s:.17e} theta = {theta:.17e}");
    trace_impl(table, bp.point, dir, n_bounces, seed, false)
}

/// Phase-space coordinates `(s, θ)` of a bounce.
pub fn boundary_coordinates(bounce: &Bounce) -> (f64, f64) {
    (bounce.at.s, bounce.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::build_table;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn hex() -> StringTable {
        build_table(6, Frame::HexagonCanonical).unwrap()
    }

    #[test]
    fn normal_incidence_reverses() {
        let table = hex();
        let hit = table
            .ray_boundary_intersection(Vec2::ZERO, Vec2::new(1.0, 0.0), DEFAULT_T_MIN)
            .unwrap();
        let out = reflect(&table, &hit, Vec2::new(1.0, 0.0)).unwrap();
        assert!(out.distance(Vec2::new(-1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn focal_reflection_at_junction() {
        let table = hex();
        let s3 = 3f64.sqrt();
        let f2 = Vec2::new(1.0, s3);
        let f4 = Vec2::new(1.0, -s3);
        let hit = table
            .ray_boundary_intersection(f2, Vec2::new(1.0, 0.0), DEFAULT_T_MIN)
            .unwrap();
        assert!(hit.point.distance(Vec2::new(3.0, s3)) < 1e-12);
        let out = reflect(&table, &hit, Vec2::new(1.0, 0.0)).unwrap();
        let want = (f4 - hit.point).normalize();
        assert!(out.distance(want) < 1e-12, "{out:?} vs {want:?}");
    }

    #[test]
    fn grazing_and_departing_rays_are_rejected() {
        let table = hex();
        let hit = table
            .ray_boundary_intersection(Vec2::ZERO, Vec2::new(1.0, 0.0), DEFAULT_T_MIN)
            .unwrap();
        assert!(matches!(
            reflect(&table, &hit, Vec2::new(0.0, 1.0)),
            Err(Error::Grazing { .. })
        ));
        assert!(reflect(&table, &hit, Vec2::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn diameter_orbit() {
        let table = hex();
        let tr = trace(&table, Vec2::ZERO, Vec2::new(1.0, 0.0), 4).unwrap();
        let x = 1.0 + 6f64.sqrt();
        for (i, b) in tr.bounces.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert!(b.at.point.distance(Vec2::new(sign * x, 0.0)) < 1e-13);
            assert!((b.theta - FRAC_PI_2).abs() < 1e-13);
            assert!((b.chord_length - 2.0 * x).abs() < 1e-13);
        }
        let (s0, th0) = boundary_coordinates(&tr.bounces[0]);
        assert!(s0 < 1e-12 && (th0 - FRAC_PI_2).abs() < 1e-13);
        let (s1, _) = boundary_coordinates(&tr.bounces[1]);
        assert!((s1 - table.boundary_length / 2.0).abs() < 1e-11);
    }

    #[test]
    fn rotation_shifts_s_by_a_sixth() {
        let table = hex();
        let dir = Vec2::new(0.8, 0.6);
        let a = trace(&table, Vec2::new(0.1, 0.2), dir, 3).unwrap();
        let b = trace(&table, Vec2::new(0.1, 0.2).rotate(FRAC_PI_3), dir.rotate(FRAC_PI_3), 3).unwrap();
        let l = table.boundary_length;
        for (x, y) in a.bounces.iter().zip(&b.bounces) {
            let ds = (y.at.s - x.at.s - l / 6.0).rem_euclid(l);
            assert!(ds.min(l - ds) < 1e-10);
            assert!((x.theta - y.theta).abs() < 1e-12);
        }
    }

    #[test]
    fn focal_chain_through_f2_f6_f4() {
        let table = hex();
        let s3 = 3f64.sqrt();
        let arc = table.arc_by_foci(2, 4).unwrap();
        let p0 = arc.point_at(arc.t_mid() + 0.2);
        let f2 = Vec2::new(1.0, s3);
        let foci = [f2, Vec2::new(-2.0, 0.0), Vec2::new(1.0, -s3)];
        let check = |tr: &Trajectory, tol: f64| {
            let mut prev = p0;
            for (i, b) in tr.bounces.iter().enumerate() {
                let focus = foci[i % 3];
                let dist = crate::polygon::point_segment_distance(focus, prev, b.at.point);
                assert!(dist < tol, "bounce {i}: {dist:e}");
                prev = b.at.point;
            }
        };
        check(&trace(&table, p0, f2 - p0, 15).unwrap(), 1e-11);
        let focal = trace_focal(&table, p0, f2 - p0, 1000).unwrap();
        check(&focal, 1e-11);
        // Re-aiming is a rounding-level correction of the specular law.
        for b in &focal.bounces {
            let exact = reflect(&table, &b.at, b.incoming).unwrap();
            assert!(exact.distance(b.outgoing) < 1e-12);
        }
        assert!(trace_focal(&table, Vec2::ZERO, Vec2::new(1.0, 0.2), 3).is_err());
    }

    #[test]
    fn theta_is_in_open_interval() {
        let table = hex();
        let tr = trace_from_boundary(&table, 3.0, 0.3, 200).unwrap();
        assert!(tr.bounces.iter().all(|b| b.theta > 0.0 && b.theta < PI));
        assert!(trace_from_boundary(&table, 3.0, 0.0, 10).is_err());
        assert!(trace(&table, Vec2::ZERO, Vec2::new(1.0, 0.0), 0).is_err());
    }
}
