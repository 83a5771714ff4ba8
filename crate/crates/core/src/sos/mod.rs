//! Poincaré surface of section in the boundary coordinates `(s, θ)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{TableId, Trajectory};
use crate::elliptic::elliptic_e_unchecked;
use crate::error::{domain, Result};
use crate::table::StringTable;

/// How section points are folded before storage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    Full,
    /// `θ > π/2` is mapped to `π − θ` (time reversal).
    UpperHalf,
    /// Upper half, and `s` taken modulo `L/n`.
    Fundamental,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub trajectory_id: usize,
    pub bounce_index: usize,
    pub s: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionDataset {
    pub table: TableId,
    pub boundary_length: f64,
    pub reduction: Reduction,
    pub points: Vec<SectionPoint>,
}

impl SectionDataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Width of the stored `s` range: `L`, or `L/n` for the fundamental domain.
    pub fn s_period(&self) -> f64 {
        match self.reduction {
            Reduction::Fundamental => self.boundary_length / self.table.n as f64,
            _ => self.boundary_length,
        }
    }

    /// `(s, θ)` pairs of one trajectory, in bounce order.
    pub fn trajectory(&self, id: usize) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.trajectory_id == id)
            .map(|p| (p.s, p.theta))
            .collect()
    }

    pub fn trajectory_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.points.iter().map(|p| p.trajectory_id).collect();
        ids.dedup();
        ids
    }

    /// Number of distinct points, merging points closer than `tol`.
    pub fn distinct_points(&self, tol: f64) -> usize {
        let period = self.s_period();
        let mut kept: Vec<(f64, f64)> = Vec::new();
        for p in &self.points {
            if !kept.iter().any(|q| {
                cyclic_delta(q.0, p.s, period).abs() < tol && (q.1 - p.theta).abs() < tol
            })
            {
                kept.push((p.s, p.theta));
            }
        }
        kept.len()
    }
}

/// Signed shortest difference `b − a` on a circle of circumference `period`.
pub(crate) fn cyclic_delta(a: f64, b: f64, period: f64) -> f64 {
    let d = (b - a).rem_euclid(period);
    if d > 0.5 * period {
        d - period
    } else {
        d
    }
}

fn reduce(s: f64, theta: f64, reduction: Reduction, length: f64, n: usize) -> (f64, f64) {
    let theta = match reduction {
        Reduction::Full => theta,
        _ if theta > 0.5 * PI => PI - theta,
        _ => theta,
    };
    let s = match reduction {
        Reduction::Fundamental => {
            let period = length / n as f64;
            let r = s.rem_euclid(period);
            if r >= period {
                0.0
            } else {
                r
            }
        }
        _ => s,
    };
    (s, theta)
}

/// Projects every bounce of every trajectory to `(s, θ)` and folds it.
/// Trajectory ids are the positions in `trajectories`.
pub fn build_section(
    table: &StringTable,
    trajectories: &[Trajectory],
    reduction: Reduction,
) -> Result<SectionDataset> {
    let id = TableId::from(table);
    if let Some(bad) = trajectories.iter().position(|t| t.table != id) {
        return domain(
            "build_section",
            format!("trajectory {bad} was traced on {:?}, not {:?}", trajectories[bad].table, id),
        );
    }
    let length = table.boundary_length;
    let per: Vec<Vec<SectionPoint>> = trajectories
        .par_iter()
        .enumerate()
        .map(|(tid, traj)| {
            traj.bounces
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let (s, theta) = reduce(b.at.s, b.theta, reduction, length, table.n);
                    SectionPoint {
                        trajectory_id: tid,
                        bounce_index: i,
                        s,
                        theta,
                    }
                })
                .collect()
        })
        .collect();
    Ok(SectionDataset {
        table: id,
        boundary_length: length,
        reduction,
        points: per.into_iter().flatten().collect(),
    })
}

/// Modulus of the elliptic integral in the focal curve: the eccentricity
/// `√3/3` of the hexagon arcs.
pub const FOCAL_CURVE_MODULUS: f64 = 0.577_350_269_189_625_8;

/// Lower end of the focal-curve angle range, `arccos(−1/3)/2`.
pub fn focal_curve_y_min() -> f64 {
    0.5 * (-1.0f64 / 3.0).acos()
}

/// Upper end of the focal-curve angle range, `arccos(−1/2)/2 = π/3`.
pub fn focal_curve_y_max() -> f64 {
    PI / 3.0
}

/// Elliptic argument `x(y) = √((1 + 3 cos 2y)(cos 2y − 1)) / (1 − cos 2y)`.
fn focal_argument(y: f64) -> f64 {
    let c = (2.0 * y).cos();
    let num = ((1.0 + 3.0 * c) * (c - 1.0)).max(0.0);
    (num.sqrt() / (1.0 - c)).min(FOCAL_CURVE_MODULUS)
}

/// Inverse of [`focal_argument`]: `cos 2y = −(1 + x²)/(3 − x²)`.
fn focal_angle_of_argument(x: f64) -> f64 {
    let c = -(1.0 + x * x) / (3.0 - x * x);
    0.5 * c.clamp(-1.0, 1.0).acos()
}

/// The focal reference curve `(E(x(y), √3/3), y)`.
///
/// The first coordinate is dimensionless; multiply by the semi-major axis of
/// the arc (see [`FocalCurve`]) to get arc length from the arc midpoint.
pub fn focal_reference_curve(y: f64) -> Result<(f64, f64)> {
    let (lo, hi) = (focal_curve_y_min(), focal_curve_y_max());
    let slack = 1e-12;
    if !(y >= lo - slack && y <= hi + slack) {
        return domain(
            "focal_reference_curve",
            format!("y = {y} outside [{lo}, {hi}]"),
        );
    }
    let x = focal_argument(y.clamp(lo, hi));
    Ok((elliptic_e_unchecked(x, FOCAL_CURVE_MODULUS), y))
}

/// The focal curve scaled to a table: `s = scale · E(x, √3/3)` measured from
/// an arc midpoint, `θ = y`.
///
/// Along the arc `x = sin u` for the eccentric offset `u` from the minor
/// vertex, so the arc length from the midpoint is `a E(x, e)` with `a` the
/// semi-major axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocalCurve {
    pub scale: f64,
    /// Distance between neighbouring copies of the curve along `s`.
    pub period: f64,
}

impl FocalCurve {
    pub fn for_table(table: &StringTable) -> Result<FocalCurve> {
        if table.n != 6 {
            return domain("FocalCurve", format!("the focal curve is for n = 6, got {}", table.n));
        }
        Ok(FocalCurve {
            scale: table.arcs[0].semi_major,
            period: table.boundary_length / 6.0,
        })
    }

    /// Point of the curve at elliptic argument `x ∈ [0, √3/3]`.
    pub fn at_argument(&self, x: f64) -> (f64, f64) {
        (
            self.scale * elliptic_e_unchecked(x, FOCAL_CURVE_MODULUS),
            focal_angle_of_argument(x),
        )
    }

    /// `count` points spread evenly in the elliptic argument.
    pub fn samples(&self, count: usize) -> Vec<(f64, f64)> {
        let count = count.max(2);
        (0..count)
            .map(|i| self.at_argument(FOCAL_CURVE_MODULUS * i as f64 / (count - 1) as f64))
            .collect()
    }

    /// Euclidean distance in the `(s, θ)` plane from `(u, theta)`, with
    /// `u ≥ 0` the offset from an arc midpoint, to the curve.
    pub fn distance(&self, u: f64, theta: f64) -> f64 {
        let d2 = |x: f64| {
            let (cs, cy) = self.at_argument(x);
            (cs - u).powi(2) + (cy - theta).powi(2)
        };
        const GRID: usize = 64;
        let h = FOCAL_CURVE_MODULUS / GRID as f64;
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for i in 0..=GRID {
            let v = d2(i as f64 * h);
            if v < best_val {
                best_val = v;
                best = i;
            }
        }
        let mut lo = (best as f64 - 1.0).max(0.0) * h;
        let mut hi = ((best + 1) as f64 * h).min(FOCAL_CURVE_MODULUS);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (d2(x1), d2(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = d2(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = d2(x2);
            }
        }
        best_val.min(f1).min(f2).min(d2(0.0)).min(d2(FOCAL_CURVE_MODULUS)).sqrt()
    }
}

/// Section points farther than this from the focal curve flag a mismatch.
pub const FOCAL_MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocalCurveMatch {
    /// `s`-translation of the data that best aligns it with the curve.
    pub offset: f64,
    pub max_residual: f64,
    pub point_count: usize,
    pub matches: bool,
}

/// Folds a point into `(u, θ')`: offset from the nearest arc midpoint after
/// removing `offset`, and angle folded into the upper half.
fn fold_to_curve(s: f64, theta: f64, offset: f64, period: f64) -> (f64, f64) {
    let r = (s - offset).rem_euclid(period);
    let u = r.min(period - r);
    (u, theta.min(PI - theta))
}

/// Aligns a section built from focal trajectories with the focal curve.
///
/// The offset runs over one period `L/6` of copies (the curve is symmetric
/// under `s ↦ −s` about each arc midpoint, and under `θ ↦ π − θ`). A coarse
/// scan and golden-section refinement use the horizontal distance to the
/// curve; the reported residual is the Euclidean distance at the optimum.
pub fn match_focal_curve(section: &SectionDataset, curve: &FocalCurve) -> FocalCurveMatch {
    if section.is_empty() {
        return FocalCurveMatch {
            offset: 0.0,
            max_residual: 0.0,
            point_count: 0,
            matches: true,
        };
    }
    let period = curve.period;
    let (ymin, ymax) = (focal_curve_y_min(), focal_curve_y_max());
    // Curve value at each point's angle, and how far the angle is off range.
    let prepared: Vec<(f64, f64, f64)> = section
        .points
        .iter()
        .map(|p| {
            let th = p.theta.min(PI - p.theta);
            let y = th.clamp(ymin, ymax);
            let h = curve.scale * elliptic_e_unchecked(focal_argument(y), FOCAL_CURVE_MODULUS);
            (p.s, h, (th - y).abs())
        })
        .collect();
    let proxy = |offset: f64| -> f64 {
        prepared
            .iter()
            .map(|&(s, h, off)| {
                let r = (s - offset).rem_euclid(period);
                let u = r.min(period - r);
                (u - h).abs().max(off)
            })
            .fold(0.0, f64::max)
    };
    const SCAN: usize = 240;
    let step = period / SCAN as f64;
    let mut best = 0.0;
    let mut best_val = f64::INFINITY;
    for i in 0..SCAN {
        let off = -0.5 * period + i as f64 * step;
        let v = proxy(off);
        if v < best_val {
            best_val = v;
            best = off;
        }
    }
    let (mut lo, mut hi) = (best - step, best + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if proxy(x1) < proxy(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let offset = 0.5 * (lo + hi);
    let offset = offset - period * (offset / period).round();
    let max_residual = section
        .points
        .par_iter()
        .map(|p| {
            let (u, th) = fold_to_curve(p.s, p.theta, offset, period);
            curve.distance(u, th)
        })
        .reduce(|| 0.0, f64::max);
    FocalCurveMatch {
        offset,
        max_residual,
        point_count: section.len(),
        matches: max_residual < FOCAL_MATCH_TOL,
    }
}

mod thickness;

pub use thickness::{curve_thickness, ThicknessReport, THICKNESS_WINDOW};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{trace, trace_focal, trace_from_boundary};
    use crate::quadrature::integrate;
    use crate::table::{build_table, Frame};
    use crate::vec2::Vec2;

    fn hex() -> StringTable {
        build_table(6, Frame::HexagonCanonical).unwrap()
    }

    #[test]
    fn reference_curve_endpoints() {
        let k = 3f64.sqrt() / 3.0;
        // Oracle: the Legendre integrand over [0, asin(1/√3)].
        let phi = k.asin();
        let oracle = integrate(|t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-15).value;
        let (s, y) = focal_reference_curve(PI / 3.0).unwrap();
        assert_eq!(y, PI / 3.0);
        assert!((s - oracle).abs() < 1e-13, "{s} vs {oracle}");
        let (s0, _) = focal_reference_curve(focal_curve_y_min()).unwrap();
        assert!(s0.abs() < 1e-7, "{s0}");
        assert!(focal_reference_curve(0.5).is_err());
        assert!(focal_reference_curve(1.1).is_err());
    }

    #[test]
    fn reference_curve_is_monotone() {
        let (lo, hi) = (focal_curve_y_min(), focal_curve_y_max());
        let mut prev = -1.0;
        for i in 0..=10_000 {
            let y = lo + (hi - lo) * i as f64 / 10_000.0;
            let (s, _) = focal_reference_curve(y).unwrap();
            assert!(s > prev || (i == 0 && s >= prev), "not increasing at {y}");
            prev = s;
        }
    }

    #[test]
    fn scaled_curve_spans_half_an_arc() {
        let table = hex();
        let curve = FocalCurve::for_table(&table).unwrap();
        let (s, y) = curve.at_argument(FOCAL_CURVE_MODULUS);
        assert!((s - table.boundary_length / 12.0).abs() < 1e-12);
        assert!((y - PI / 3.0).abs() < 1e-15);
        // The argument round trip.
        for i in 0..=20 {
            let x = FOCAL_CURVE_MODULUS * i as f64 / 20.0;
            assert!((focal_argument(focal_angle_of_argument(x)) - x).abs() < 1e-7);
        }
    }

    #[test]
    fn diameter_gives_two_normal_points() {
        let table = hex();
        let traj = trace(&table, Vec2::ZERO, Vec2::new(1.0, 0.0), 50).unwrap();
        let sec = build_section(&table, &[traj], Reduction::Full).unwrap();
        assert_eq!(sec.len(), 50);
        assert_eq!(sec.distinct_points(1e-9), 2);
        for p in &sec.points {
            assert!((p.theta - 0.5 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn reductions_stay_in_their_domains() {
        let table = hex();
        let trajs: Vec<Trajectory> = (0..5)
            .map(|i| trace_from_boundary(&table, 1.0 + 3.0 * i as f64, 0.3 + 0.5 * i as f64, 100).unwrap())
            .collect();
        for red in [Reduction::Full, Reduction::UpperHalf, Reduction::Fundamental] {
            let sec = build_section(&table, &trajs, red).unwrap();
            assert_eq!(sec.len(), 500);
            for id in 0..5 {
                assert_eq!(sec.trajectory(id).len(), 100);
            }
            for p in &sec.points {
                assert!(p.s >= 0.0 && p.s < sec.s_period());
                assert!(p.theta > 0.0 && p.theta < PI);
                if red != Reduction::Full {
                    assert!(p.theta <= 0.5 * PI);
                }
            }
        }
    }

    #[test]
    fn mixed_tables_are_rejected() {
        let hexagon = hex();
        let square = build_table(5, Frame::Generic).unwrap();
        let a = trace_from_boundary(&hexagon, 1.0, 1.0, 10).unwrap();
        let b = trace_from_boundary(&square, 1.0, 1.0, 10).unwrap();
        assert!(build_section(&hexagon, &[a, b], Reduction::Full).is_err());
    }

    #[test]
    fn rotated_batch_is_six_fold_periodic() {
        let table = hex();
        let length = table.boundary_length;
        let base = [(0.4, 0.3), (2.0, 1.1), (5.5, 0.8)];
        let mut trajs = Vec::new();
        for m in 0..6 {
            for &(s, th) in &base {
                trajs.push(trace_from_boundary(&table, s + m as f64 * length / 6.0, th, 60).unwrap());
            }
        }
        let sec = build_section(&table, &trajs, Reduction::Full).unwrap();
        let pts: Vec<(f64, f64)> = sec.points.iter().map(|p| (p.s, p.theta)).collect();
        let mut worst: f64 = 0.0;
        for &(s, th) in &pts {
            let moved = ((s + length / 6.0).rem_euclid(length), th);
            let d = pts
                .iter()
                .map(|q| cyclic_delta(q.0, moved.0, length).hypot(q.1 - moved.1))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn reversed_trajectory_reflects_theta() {
        let table = hex();
        let fwd = trace_from_boundary(&table, 3.3, 0.9, 40).unwrap();
        let last = fwd.bounces.last().unwrap();
        let back = trace(&table, last.at.point, -last.incoming, 39).unwrap();
        for (j, b) in back.bounces.iter().enumerate() {
            let orig = &fwd.bounces[38 - j];
            assert!(cyclic_delta(orig.at.s, b.at.s, table.boundary_length).abs() < 1e-8);
            assert!((b.theta - (PI - orig.theta)).abs() < 1e-8);
        }
    }

    fn focal_batch(table: &StringTable, count: usize, bounces: usize) -> Vec<Trajectory> {
        let f2 = Vec2::new(1.0, 3f64.sqrt());
        (0..count)
            .map(|i| {
                // Aim from F2 at points spread over arc ⌢24's far side.
                let y = -1.7 + 3.4 * (i as f64 + 0.5) / count as f64;
                let target = Vec2::new(4.0, y);
                trace_focal(table, f2, (target - f2).normalize(), bounces).unwrap()
            })
            .collect()
    }

    #[test]
    fn focal_points_lie_on_the_reference_curve() {
        let table = hex();
        let trajs = focal_batch(&table, 8, 60);
        let sec = build_section(&table, &trajs, Reduction::Full).unwrap();
        let curve = FocalCurve::for_table(&table).unwrap();
        let m = match_focal_curve(&sec, &curve);
        assert!(m.matches, "{m:?}");
        assert!(m.offset.abs() < 1e-6, "{m:?}");
        for p in &sec.points {
            let th = p.theta.min(PI - p.theta);
            assert!(th >= focal_curve_y_min() - 1e-9 && th <= PI / 3.0 + 1e-9);
        }
    }

    #[test]
    fn focal_match_controls() {
        let table = hex();
        let curve = FocalCurve::for_table(&table).unwrap();
        let empty = build_section(&table, &[], Reduction::Full).unwrap();
        let m = match_focal_curve(&empty, &curve);
        assert_eq!(m.point_count, 0);
        let generic = trace_from_boundary(&table, 1.0, 0.7, 200).unwrap();
        let sec = build_section(&table, &[generic], Reduction::Full).unwrap();
        let m = match_focal_curve(&sec, &curve);
        assert!(!m.matches);
        assert!(m.max_residual > 1e-2, "{m:?}");
        // The unscaled printed curve does not fit the traced data.
        let unscaled = FocalCurve { scale: 1.0, ..curve };
        let sec = build_section(&table, &focal_batch(&table, 4, 40), Reduction::Full).unwrap();
        assert!(!match_focal_curve(&sec, &unscaled).matches);
    }

    #[test]
    fn curve_distance_of_curve_points_vanishes() {
        let curve = FocalCurve::for_table(&hex()).unwrap();
        for (s, y) in curve.samples(33) {
            assert!(curve.distance(s, y) < 1e-12);
        }
        assert!((curve.distance(0.0, 0.5) - (focal_curve_y_min() - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn thickness_separates_curves_from_clouds() {
        use rand::{Rng, SeedableRng};
        let length = 20.0;
        let wavy: Vec<(f64, f64)> = (0..480)
            .map(|i| {
                let s = (i as f64 * 0.618_033_988_75 * length).rem_euclid(length);
                (s, 0.4 + 0.02 * (2.0 * PI * s / length * 6.0).sin())
            })
            .collect();
        let r = curve_thickness(&wavy, length, THICKNESS_WINDOW);
        assert!(r.max_thickness < 1e-3 * length, "{r:?}");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cloud: Vec<(f64, f64)> = (0..480)
            .map(|_| (rng.random_range(0.0..length), rng.random_range(0.2..1.2)))
            .collect();
        let r = curve_thickness(&cloud, length, THICKNESS_WINDOW);
        assert!(r.max_thickness > 1e-3 * length, "{r:?}");
        let few = vec![(1.0, 1.0); 30];
        assert_eq!(curve_thickness(&few, length, THICKNESS_WINDOW).distinct_points, 1);
    }
}
