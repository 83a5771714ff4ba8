//! Construction of the C² string billiard table over a regular n-gon.
//!
//! The polygon K has side 2. One isosceles triangle is stellated onto a side
//! and the string length is the perimeter of the result,
//! `l = 2(n − 1) + 2d` with apex leg `d = −1/cos α`. The boundary is then a
//! union of n congruent elliptical arcs meeting at the stellation apexes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::EllipseArc;
use crate::polygon::ConvexPolygon;
use crate::vec2::Vec2;

/// Coordinate frame of a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// `F₁ = (−1, 0)`, `F₂ = (1, 0)`, polygon below the x axis.
    Generic,
    /// Hexagon centered at the origin with `F₁ = (−1, √3)`, `F₃ = (2, 0)`.
    HexagonCanonical,
}

/// The billiard domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StringTable {
    pub n: usize,
    pub frame: Frame,
    /// Interior angle of K, `(n − 2)π/n`.
    pub alpha: f64,
    pub side_length: f64,
    /// Leg length of the stellation triangle.
    pub d: f64,
    pub string_length: f64,
    /// Center of K.
    pub center: Vec2,
    /// Vertices `F₁..Fₙ` of K (clockwise, following the construction).
    pub foci: Vec<Vec2>,
    /// `G_i` is the stellation apex over side `F_i F_{i+1}`.
    pub apexes: Vec<Vec2>,
    /// Boundary arcs in counterclockwise order; O is the midpoint of arc 0.
    pub arcs: Vec<EllipseArc>,
    pub boundary_length: f64,
    /// Length of a single arc (all arcs are congruent).
    pub arc_len: f64,
}

/// `l = 2(n − 1) − 2/cos((n − 2)π/n)`.
pub fn string_length(n: usize) -> Result<f64> {
    if n < 5 {
        return domain(
            "string_length",
            format!("n = {n}: the construction needs n >= 5"),
        );
    }
    Ok(2.0 * (n as f64 - 1.0) + 2.0 * apex_leg(n))
}

/// `d = −1/cos α = 1/cos(2π/n)`, using radicals where they exist so that
/// e.g. the hexagon gets `d = 2` with no rounding.
fn apex_leg(n: usize) -> f64 {
    match n {
        5 => 5f64.sqrt() + 1.0,
        6 => 2.0,
        8 => 2f64.sqrt(),
        10 => 5f64.sqrt() - 1.0,
        12 => 2.0 / 3f64.sqrt(),
        _ => -1.0 / interior_angle(n).cos(),
    }
}

fn interior_angle(n: usize) -> f64 {
    (n as f64 - 2.0) * PI / n as f64
}

fn generic_foci(n: usize) -> (Vec2, Vec<Vec2>) {
    let nf = n as f64;
    let center = Vec2::new(0.0, -1.0 / (PI / nf).tan());
    let radius = 1.0 / (PI / nf).sin();
    let start = 0.5 * PI + PI / nf;
    let foci = (0..n)
        .map(|k| {
            // Snap the first two vertices so F₁, F₂ come out exact.
            match k {
                0 => Vec2::new(-1.0, 0.0),
                1 => Vec2::new(1.0, 0.0),
                _ => center + Vec2::from_angle(start - 2.0 * PI * k as f64 / nf) * radius,
            }
        })
        .collect();
    (center, foci)
}

fn hexagon_foci() -> Vec<Vec2> {
    let s3 = 3f64.sqrt();
    vec![
        Vec2::new(-1.0, s3),
        Vec2::new(1.0, s3),
        Vec2::new(2.0, 0.0),
        Vec2::new(1.0, -s3),
        Vec2::new(-1.0, -s3),
        Vec2::new(-2.0, 0.0),
    ]
}

fn hexagon_apexes() -> Vec<Vec2> {
    let s3 = 3f64.sqrt();
    vec![
        Vec2::new(0.0, 2.0 * s3),
        Vec2::new(3.0, s3),
        Vec2::new(3.0, -s3),
        Vec2::new(0.0, -2.0 * s3),
        Vec2::new(-3.0, -s3),
        Vec2::new(-3.0, s3),
    ]
}

/// Builds the C² table for the regular `n`-gon.
pub fn build_table(n: usize, frame: Frame) -> Result<StringTable> {
    let l = string_length(n)?;
    if frame == Frame::HexagonCanonical && n != 6 {
        return domain(
            "build_table",
            format!("the hexagon-canonical frame requires n = 6, got {n}"),
        );
    }
    let alpha = interior_angle(n);
    let d = apex_leg(n);
    let (center, foci, apexes) = match frame {
        Frame::Generic => {
            let (center, foci) = generic_foci(n);
            let height = ((d - 1.0) * (d + 1.0)).sqrt();
            let apexes = (0..n)
                .map(|i| {
                    let mid = (foci[i] + foci[(i + 1) % n]) * 0.5;
                    mid + (mid - center).normalize() * height
                })
                .collect::<Vec<_>>();
            (center, foci, apexes)
        }
        Frame::HexagonCanonical => (Vec2::ZERO, hexagon_foci(), hexagon_apexes()),
    };

    // The arc wrapping around vertex j has foci F_{j−1}, F_{j+1} and runs
    // between the apexes over the two sides meeting at F_j. Vertices are
    // numbered clockwise, so counterclockwise order is decreasing j.
    let polar = |j: usize| (foci[j] - center).y.atan2((foci[j] - center).x).rem_euclid(2.0 * PI);
    let first = (0..n)
        .min_by(|&a, &b| {
            // Treat angles a hair below 2π as 0 so the +x axis wins.
            let wa = polar(a);
            let wb = polar(b);
            let wa = if 2.0 * PI - wa < 1e-9 { 0.0 } else { wa };
            let wb = if 2.0 * PI - wb < 1e-9 { 0.0 } else { wb };
            wa.total_cmp(&wb)
        })
        .expect("n >= 5");
    let focal_sum = 2.0 + 2.0 * d;
    let mut arcs = Vec::with_capacity(n);
    for arc_id in 0..n {
        let j = (first + n - arc_id) % n;
        let prev = (j + n - 1) % n;
        let next = (j + 1) % n;
        let arc = EllipseArc::from_foci(
            arc_id,
            ordered_labels(prev + 1, next + 1, n),
            foci[prev],
            foci[next],
            focal_sum,
            foci[j] - center,
            (apexes[prev], apexes[j]),
        )?;
        arcs.push(arc);
    }
    let arc_len = arcs[0].signed_length(arcs[0].t_start, arcs[0].t_end);
    Ok(StringTable {
        n,
        frame,
        alpha,
        side_length: 2.0,
        d,
        string_length: l,
        center,
        foci,
        apexes,
        arcs,
        boundary_length: arc_len * n as f64,
        arc_len,
    })
}

// Arc ⌢ij is labelled with i < j except for the wrap-around pair, which
// keeps the order of traversal (⌢62 for the hexagon).
fn ordered_labels(a: usize, b: usize, n: usize) -> (usize, usize) {
    if b < a && a - b == n - 2 {
        (a, b)
    } else {
        (a.min(b), a.max(b))
    }
}

impl StringTable {
    pub fn arc(&self, arc_id: usize) -> Result<&EllipseArc> {
        match self.arcs.get(arc_id) {
            Some(a) => Ok(a),
            None => domain("arc", format!("no arc {arc_id} in an {}-arc table", self.n)),
        }
    }

    /// The foci polygon K, counterclockwise.
    pub fn polygon(&self) -> ConvexPolygon {
        let mut v = self.foci.clone();
        v.reverse();
        ConvexPolygon::new(v)
    }

    /// Arc lying on the given focus pair (labels in either order).
    pub fn arc_by_foci(&self, i: usize, j: usize) -> Option<&EllipseArc> {
        self.arcs
            .iter()
            .find(|a| a.foci_labels == (i, j) || a.foci_labels == (j, i))
    }

    /// `m` boundary points per arc, counterclockwise, starting at arc 0's start.
    pub fn sample_boundary(&self, per_arc: usize) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(per_arc * self.n);
        for arc in &self.arcs {
            for i in 0..per_arc {
                let t = arc.t_start + (arc.t_end - arc.t_start) * i as f64 / per_arc as f64;
                out.push(arc.point_at(t));
            }
        }
        out
    }

    /// Axis-aligned bounding box `(min, max)` of the table.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let pts = self.sample_boundary(64);
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        // Sampling can undershoot between samples; pad generously.
        let pad = 0.05 * (hi - lo).hypot();
        (lo - Vec2::new(pad, pad), hi + Vec2::new(pad, pad))
    }

    /// Whether `p` lies strictly inside the table.
    pub fn contains(&self, p: Vec2) -> bool {
        // The table is star-shaped about its center: find the arc whose
        // angular sector holds p and test against that arc's ellipse only.
        let v = p - self.center;
        if v.hypot() == 0.0 {
            return true;
        }
        self.arcs
            .iter()
            .find(|a| {
                let s = a.point_at(a.t_start) - self.center;
                let e = a.point_at(a.t_end) - self.center;
                s.cross(v) >= 0.0 && v.cross(e) >= 0.0
            })
            .is_some_and(|a| a.implicit(p) < 0.0)
    }
}

/// Smoothness measurements at one junction between consecutive arcs.
#[derive(Clone, Debug, Serialize)]
pub struct JunctionReport {
    /// Junction between arc `index` and arc `index + 1 (mod n)`.
    pub index: usize,
    pub point: Vec2,
    pub point_gap: f64,
    pub tangent_gap: f64,
    pub curvature_gap: f64,
    /// Slope `dy/dx` from each side, when the tangent is not vertical.
    pub slopes: Option<(f64, f64)>,
    /// `d²y/dx²` from each side, when the tangent is not vertical.
    pub second_derivatives: Option<(f64, f64)>,
    pub pass: bool,
}

/// Apex check at `G₁` in the generic frame.
#[derive(Clone, Debug, Serialize)]
pub struct ApexCheck {
    pub slopes: (f64, f64),
    pub second_derivatives: (f64, f64),
    /// `(cos α − 1) cos α sin α / (2 cos α − 1)`.
    pub expected_second_derivative: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessReport {
    pub tol_tangent: f64,
    pub tol_curvature: f64,
    pub junctions: Vec<JunctionReport>,
    pub apex: Option<ApexCheck>,
    pub pass: bool,
}

fn graph_derivatives(arc: &EllipseArc, t: f64) -> Option<(f64, f64)> {
    let d1 = arc.derivative_at(t);
    let d2 = arc.second_derivative_at(t);
    if d1.x.abs() < 1e-6 * d1.hypot() {
        return None;
    }
    let slope = d1.y / d1.x;
    let second = (d1.x * d2.y - d1.y * d2.x) / d1.x.powi(3);
    Some((slope, second))
}

/// Checks point, tangent and curvature continuity at every junction.
pub fn verify_c2(table: &StringTable, tol_tangent: f64, tol_curvature: f64) -> SmoothnessReport {
    let n = table.n;
    let mut junctions = Vec::with_capacity(n);
    for i in 0..n {
        let a = &table.arcs[i];
        let b = &table.arcs[(i + 1) % n];
        let pa = a.point_at(a.t_end);
        let pb = b.point_at(b.t_start);
        let point_gap = pa.distance(pb);
        let tangent_gap = a.tangent_at(a.t_end).distance(b.tangent_at(b.t_start));
        let curvature_gap = (a.curvature_at(a.t_end) - b.curvature_at(b.t_start)).abs();
        let ga = graph_derivatives(a, a.t_end);
        let gb = graph_derivatives(b, b.t_start);
        let (slopes, second_derivatives) = match (ga, gb) {
            (Some(x), Some(y)) => (Some((x.0, y.0)), Some((x.1, y.1))),
            _ => (None, None),
        };
        junctions.push(JunctionReport {
            index: i,
            point: pa,
            point_gap,
            tangent_gap,
            curvature_gap,
            slopes,
            second_derivatives,
            pass: point_gap < 1e-12 && tangent_gap < tol_tangent && curvature_gap < tol_curvature,
        });
    }

    let apex = (table.frame == Frame::Generic).then(|| {
        let g1 = table.apexes[0];
        let ends: Vec<(f64, f64)> = table
            .arcs
            .iter()
            .flat_map(|arc| [arc.t_start, arc.t_end].map(|t| (arc, t)))
            .filter(|(arc, t)| arc.point_at(*t).distance(g1) < 1e-9)
            .filter_map(|(arc, t)| graph_derivatives(arc, t))
            .collect();
        let ca = table.alpha.cos();
        let sa = table.alpha.sin();
        let expected = (ca - 1.0) * ca * sa / (2.0 * ca - 1.0);
        let (l, r) = match ends.as_slice() {
            [l, r] => (*l, *r),
            _ => ((f64::NAN, f64::NAN), (f64::NAN, f64::NAN)),
        };
        let pass = l.0.abs() < tol_tangent
            && r.0.abs() < tol_tangent
            && (l.1 - expected).abs() < tol_curvature
            && (r.1 - expected).abs() < tol_curvature;
        ApexCheck {
            slopes: (l.0, r.0),
            second_derivatives: (l.1, r.1),
            expected_second_derivative: expected,
            pass,
        }
    });

    let pass = junctions.iter().all(|j| j.pass) && apex.as_ref().is_none_or(|a| a.pass);
    SmoothnessReport {
        tol_tangent,
        tol_curvature,
        junctions,
        apex,
        pass,
    }
}

/// Minimum and maximum boundary curvature over `samples_per_arc` samples per
/// arc plus the analytic critical points (ellipse vertices and endpoints).
pub fn curvature_range(table: &StringTable, samples_per_arc: usize) -> Result<(f64, f64)> {
    if samples_per_arc < 2 {
        return domain("curvature_range", "need at least 2 samples per arc");
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for arc in &table.arcs {
        let mut ts: Vec<f64> = (0..samples_per_arc)
            .map(|i| arc.t_start + (arc.t_end - arc.t_start) * i as f64 / (samples_per_arc - 1) as f64)
            .collect();
        for k in -2..=2 {
            let t = k as f64 * 0.5 * PI;
            if arc.contains_param(t) {
                ts.push(t);
            }
        }
        ts.push(arc.t_mid());
        for t in ts {
            let k = arc.curvature_at(t.clamp(arc.t_start, arc.t_end));
            lo = lo.min(k);
            hi = hi.max(k);
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_length_values() {
        assert_eq!(string_length(6).unwrap(), 14.0);
        // 8 + 2/cos(2π/5) = 10 + 2√5 = 14.4721359549995793928...
        assert!((string_length(5).unwrap() - 14.472_135_954_999_58).abs() < 1e-12);
        assert!(string_length(4).is_err());
        assert!(string_length(3).is_err());
    }

    #[test]
    fn string_length_increases_from_the_hexagon_on() {
        // The pentagon is the exception: 10 + 2√5 > 14.
        assert!(string_length(5).unwrap() > string_length(6).unwrap());
        let v: Vec<f64> = (6..40).map(|n| string_length(n).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn generic_vertices_follow_closed_forms() {
        for n in 5..=12 {
            let t = build_table(n, Frame::Generic).unwrap();
            let (ca, sa) = (t.alpha.cos(), t.alpha.sin());
            let f = &t.foci;
            let close = |a: Vec2, b: Vec2| a.distance(b) < 1e-12;
            assert!(close(f[2], Vec2::new(1.0 - 2.0 * ca, -2.0 * sa)));
            assert!(close(f[3], Vec2::new(-1.0 - 2.0 * ca + 4.0 * ca * ca, 2.0 * (2.0 * ca - 1.0) * sa)));
            assert!(close(f[n - 2], Vec2::new(1.0 + 2.0 * ca - 4.0 * ca * ca, 2.0 * (2.0 * ca - 1.0) * sa)));
            assert!(close(f[n - 1], Vec2::new(-1.0 + 2.0 * ca, -2.0 * sa)));
            assert!(close(t.apexes[0], Vec2::new(0.0, -sa / ca)));
            assert!(close(t.apexes[1], Vec2::new((ca - 1.0) / ca, 0.0)));
            assert!(close(t.apexes[n - 1], Vec2::new(-(ca - 1.0) / ca, 0.0)));
            for i in 0..n {
                assert!((f[i].distance(f[(i + 1) % n]) - 2.0).abs() < 1e-12);
            }
            // Legs: l = perimeter − side + 2d.
            let legs = f[0].distance(t.apexes[0]) + f[1].distance(t.apexes[0]);
            assert!((2.0 * n as f64 - 2.0 + legs - t.string_length).abs() < 1e-12);
        }
    }

    #[test]
    fn hexagon_frames_agree_up_to_translation() {
        let g = build_table(6, Frame::Generic).unwrap();
        let h = build_table(6, Frame::HexagonCanonical).unwrap();
        let shift = Vec2::new(0.0, 3f64.sqrt());
        for i in 0..6 {
            assert!((g.foci[i] + shift).distance(h.foci[i]) < 1e-14);
            assert!((g.apexes[i] + shift).distance(h.apexes[i]) < 1e-14);
        }
        assert!((g.boundary_length - h.boundary_length).abs() < 1e-12);
        assert!(build_table(7, Frame::HexagonCanonical).is_err());
    }

    #[test]
    fn hexagon_arc_labels_and_equations() {
        let t = build_table(6, Frame::HexagonCanonical).unwrap();
        let labels: Vec<_> = t.arcs.iter().map(|a| a.foci_labels).collect();
        assert_eq!(labels, vec![(2, 4), (1, 3), (6, 2), (5, 1), (4, 6), (3, 5)]);
        let a24 = t.arc_by_foci(2, 4).unwrap();
        let a13 = t.arc_by_foci(1, 3).unwrap();
        let s3 = 3f64.sqrt();
        for i in 0..=20 {
            let u = i as f64 / 20.0;
            let p = a24.point_at(a24.t_start + u * (a24.t_end - a24.t_start));
            assert!(((p.x - 1.0).powi(2) / 6.0 + p.y * p.y / 9.0 - 1.0).abs() < 1e-14);
            let q = a13.point_at(a13.t_start + u * (a13.t_end - a13.t_start));
            let e = 11.0 * q.y * q.y + 2.0 * s3 * (q.x - 6.0) * q.y + 9.0 * q.x * q.x - 12.0 * q.x;
            assert!((e - 60.0).abs() < 1e-12, "{e}");
        }
        assert!((a24.semi_major - 3.0).abs() < 1e-15);
        assert!((a24.semi_minor - 6f64.sqrt()).abs() < 1e-14);
        assert_eq!(t.arcs.iter().map(|a| a.focal_sum).collect::<Vec<_>>(), vec![6.0; 6]);
    }

    #[test]
    fn junction_derivatives_at_3_sqrt3() {
        let t = build_table(6, Frame::HexagonCanonical).unwrap();
        let rep = verify_c2(&t, 1e-10, 1e-9);
        assert!(rep.pass);
        let s3 = 3f64.sqrt();
        let j = rep
            .junctions
            .iter()
            .find(|j| j.point.distance(Vec2::new(3.0, s3)) < 1e-12)
            .unwrap();
        let (a, b) = j.slopes.unwrap();
        assert!((a + s3).abs() < 1e-10 && (b + s3).abs() < 1e-10);
        let (a, b) = j.second_derivatives.unwrap();
        assert!((a + 1.5 * s3).abs() < 1e-9 && (b + 1.5 * s3).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn generic_apex_check() {
        let t = build_table(6, Frame::Generic).unwrap();
        let rep = verify_c2(&t, 1e-10, 1e-9);
        let apex = rep.apex.unwrap();
        assert!(apex.pass);
        assert!(apex.slopes.0.abs() < 1e-12);
        // (cos α − 1)cos α sin α/(2cos α − 1) at α = 2π/3 equals −3√3/16.
        assert!((apex.expected_second_derivative + 3.0 * 3f64.sqrt() / 16.0).abs() < 1e-15);
        for n in 5..=12 {
            assert!(verify_c2(&build_table(n, Frame::Generic).unwrap(), 1e-10, 1e-9).pass, "n = {n}");
        }
    }

    #[test]
    fn hexagon_curvature_bounds() {
        let t = build_table(6, Frame::HexagonCanonical).unwrap();
        let (lo, hi) = curvature_range(&t, 101).unwrap();
        assert!((lo - 6f64.sqrt() / 9.0).abs() < 1e-10);
        assert!((hi - 3.0 * 3f64.sqrt() / 16.0).abs() < 1e-10);
        assert!(curvature_range(&t, 1).is_err());
    }

    #[test]
    fn enneagon_table() {
        let t = build_table(9, Frame::Generic).unwrap();
        assert_eq!(t.arcs.len(), 9);
        let expected = 16.0 - 2.0 / (7.0 * PI / 9.0).cos();
        assert!((t.string_length - expected).abs() < 1e-13);
        assert!(verify_c2(&t, 1e-10, 1e-9).pass);
    }
}
