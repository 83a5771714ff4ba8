//! Curve-thickness statistic: how far one orbit's section points are from
//! lying on smooth curves.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use super::cyclic_delta;

/// Number of consecutive chain points in one window.
pub const THICKNESS_WINDOW: usize = 25;

/// Points closer than this in both coordinates count as one.
const DISTINCT_TOL: f64 = 1e-9;

/// An island class is closed when no angular gap about its centroid
/// exceeds this.
const CLOSED_GAP: f64 = 0.8 * PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    /// Largest distance, in the `(s, θ)` plane, of a point from the local
    /// curve fitted to its window.
    pub max_thickness: f64,
    pub windows: usize,
    /// Number of islands the orbit circulates through, `None` for an orbit
    /// that runs around the whole boundary.
    pub island_period: Option<usize>,
    pub distinct_points: usize,
    /// Fewer distinct points than one window: a periodic orbit.
    pub periodic: bool,
}

type Pt = (f64, f64);

fn distinct_count(points: &[Pt], period: f64) -> usize {
    let mut kept: Vec<Pt> = Vec::new();
    for &p in points {
        if !kept.iter().any(|q| {
            cyclic_delta(q.0, p.0, period).abs() < DISTINCT_TOL && (q.1 - p.1).abs() < DISTINCT_TOL
        }) {
            kept.push(p);
        }
    }
    kept.len()
}

/// Length of the shortest arc of the `s` circle holding all points.
fn s_extent(points: &[Pt], period: f64) -> f64 {
    let mut s: Vec<f64> = points.iter().map(|p| p.0.rem_euclid(period)).collect();
    s.sort_by(f64::total_cmp);
    let wrap = s[0] + period - s[s.len() - 1];
    let gap = s.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
    period - gap
}

/// Makes `s` continuous around the first point.
fn unwrap(points: &[Pt], period: f64) -> Vec<Pt> {
    let s0 = points[0].0;
    points
        .iter()
        .map(|p| (s0 + cyclic_delta(s0, p.0, period), p.1))
        .collect()
}

/// Polar angles about the centroid, with `s` shrunk by `stretch` so that
/// both axes span comparable ranges.
fn polar_angles(points: &[Pt], stretch: f64) -> Vec<f64> {
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    points
        .iter()
        .map(|p| (p.1 - my).atan2((p.0 - mx) / stretch))
        .collect()
}

fn is_closed(points: &[Pt], stretch: f64) -> bool {
    let mut a = polar_angles(points, stretch);
    a.sort_by(f64::total_cmp);
    let wrap = a[0] + 2.0 * PI - a[a.len() - 1];
    a.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max) < CLOSED_GAP
}

/// The points visited every `m`-th bounce starting at bounce `r`.
fn class(points: &[Pt], r: usize, m: usize) -> Vec<Pt> {
    points[r..].iter().step_by(m).copied().collect()
}

/// Smallest `m` such that every `m`-th iterate stays on one closed oval.
fn island_period(points: &[Pt], period: f64) -> Option<usize> {
    let stretch = period / PI;
    (1..=points.len() / 4).find(|&m| {
        (0..m).all(|r| {
            let c = class(points, r, m);
            s_extent(&c, period) < 0.5 * period && is_closed(&unwrap(&c, period), stretch)
        })
    })
}

/// Largest residual of the best quadratic graph `v(u)` over twelve
/// orientations of the `u` axis.
fn graph_fit(w: &[Pt]) -> f64 {
    let n = w.len() as f64;
    let (mx, my) = w.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let mut best = f64::INFINITY;
    for k in 0..12 {
        let (sin, cos) = (PI * k as f64 / 12.0).sin_cos();
        let uv: Vec<Pt> = w
            .iter()
            .map(|p| {
                let (dx, dy) = (p.0 - mx, p.1 - my);
                (cos * dx + sin * dy, -sin * dx + cos * dy)
            })
            .collect();
        let scale = uv.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        let a = DMatrix::from_fn(uv.len(), 3, |i, j| (uv[i].0 / scale).powi(j as i32));
        let b = DVector::from_iterator(uv.len(), uv.iter().map(|p| p.1));
        if let Ok(c) = a.clone().svd(true, true).solve(&b, 1e-13) {
            best = best.min((a * c - b).amax());
        }
    }
    best
}

/// Algebraic conic `A x² + B xy + C y² + D x + E y + F = 0` through the
/// points, in coordinates centred on `centre`.
fn algebraic_conic(w: &[Pt], centre: Pt) -> Option<[f64; 6]> {
    let sx = w.iter().map(|p| (p.0 - centre.0).abs()).fold(0.0, f64::max);
    let sy = w.iter().map(|p| (p.1 - centre.1).abs()).fold(0.0, f64::max);
    if sx == 0.0 || sy == 0.0 || w.len() < 5 {
        return None;
    }
    // Whitened so that both axes carry equal weight in the fit.
    let rows = w.len().max(6);
    let d = DMatrix::from_fn(rows, 6, |i, j| {
        let Some(p) = w.get(i) else { return 0.0 };
        let (x, y) = ((p.0 - centre.0) / sx, (p.1 - centre.1) / sy);
        [x * x, x * y, y * y, x, y, 1.0][j]
    });
    let svd = d.svd(false, true);
    let v_t = svd.v_t?;
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let c = v_t.row(imin);
    Some([
        c[0] / (sx * sx),
        c[1] / (sx * sy),
        c[2] / (sy * sy),
        c[3] / sx,
        c[4] / sy,
        c[5],
    ])
}

fn centroid(w: &[Pt]) -> Pt {
    let n = w.len() as f64;
    w.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n))
}

/// Largest first-order (Sampson) distance to the algebraic conic.
fn conic_fit(w: &[Pt]) -> f64 {
    let m = centroid(w);
    let Some(c) = algebraic_conic(w, m) else {
        return f64::INFINITY;
    };
    w.iter()
        .map(|p| {
            let (x, y) = (p.0 - m.0, p.1 - m.1);
            let q = c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5];
            let gx = 2.0 * c[0] * x + c[1] * y + c[3];
            let gy = c[1] * x + 2.0 * c[2] * y + c[4];
            q.abs() / gx.hypot(gy)
        })
        .fold(0.0, f64::max)
}

/// Distance from `(y0, y1)`, both non-negative, to the ellipse with semi-axes
/// `e0 ≥ e1`, by bisection on the Lagrange multiplier.
fn ellipse_distance(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let (z0, z1) = (y0 / e0, y1 / e1);
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let n0 = r0 * z0;
            let mut s0 = z1 - 1.0;
            let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
            let mut s = 0.0;
            for _ in 0..200 {
                s = 0.5 * (s0 + s1);
                if s == s0 || s == s1 {
                    break;
                }
                let g = (n0 / (s + r0)).powi(2) + (z1 / (s + 1.0)).powi(2) - 1.0;
                if g > 0.0 {
                    s0 = s;
                } else if g < 0.0 {
                    s1 = s;
                } else {
                    break;
                }
            }
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            (x0 - y0).hypot(x1 - y1)
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xd = numer / denom;
            (e0 * xd - y0).hypot(e1 * (1.0 - xd * xd).sqrt())
        } else {
            (y0 - e0).abs()
        }
    }
}

/// Signed distances of the points to the ellipse `p = [cx, cy, a, b, φ]`.
fn ellipse_residuals(w: &[Pt], p: &Vector5<f64>) -> DVector<f64> {
    let (sin, cos) = p[4].sin_cos();
    let (a, b) = (p[2].abs(), p[3].abs());
    DVector::from_iterator(
        w.len(),
        w.iter().map(|q| {
            let (dx, dy) = (q.0 - p[0], q.1 - p[1]);
            let u = cos * dx + sin * dy;
            let v = -sin * dx + cos * dy;
            let d = if a >= b {
                ellipse_distance(a, b, u.abs(), v.abs())
            } else {
                ellipse_distance(b, a, v.abs(), u.abs())
            };
            if (u / a).powi(2) + (v / b).powi(2) < 1.0 {
                -d
            } else {
                d
            }
        }),
    )
}

/// Initial ellipse from the algebraic conic, if it is an ellipse.
fn ellipse_from_conic(w: &[Pt]) -> Option<Vector5<f64>> {
    let m = centroid(w);
    let [a, b, c, d, e, f] = algebraic_conic(w, m)?;
    let det = 4.0 * a * c - b * b;
    if det <= 0.0 {
        return None;
    }
    let x0 = (b * e - 2.0 * c * d) / det;
    let y0 = (b * d - 2.0 * a * e) / det;
    let f0 = f + 0.5 * (d * x0 + e * y0);
    let phi = 0.5 * b.atan2(a - c);
    let (sin, cos) = phi.sin_cos();
    let l1 = a * cos * cos + b * sin * cos + c * sin * sin;
    let l2 = a * sin * sin - b * sin * cos + c * cos * cos;
    let (ax1, ax2) = (-f0 / l1, -f0 / l2);
    if !(ax1 > 0.0 && ax2 > 0.0) {
        return None;
    }
    Some(Vector5::new(m.0 + x0, m.1 + y0, ax1.sqrt(), ax2.sqrt(), phi))
}

/// Initial ellipse from the principal axes of the points.
fn ellipse_from_moments(w: &[Pt]) -> Vector5<f64> {
    let m = centroid(w);
    let n = w.len() as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in w {
        let (dx, dy) = (p.0 - m.0, p.1 - m.1);
        sxx += dx * dx / n;
        sxy += dx * dy / n;
        syy += dy * dy / n;
    }
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (sin, cos) = phi.sin_cos();
    let l1 = sxx * cos * cos + 2.0 * sxy * sin * cos + syy * sin * sin;
    let l2 = sxx * sin * sin - 2.0 * sxy * sin * cos + syy * cos * cos;
    Vector5::new(m.0, m.1, (2.0 * l1).sqrt(), (2.0 * l2.max(0.0)).sqrt().max(1e-12), phi)
}

/// Levenberg–Marquardt on the orthogonal distances.
fn refine_ellipse(w: &[Pt], mut p: Vector5<f64>) -> f64 {
    let mut r = ellipse_residuals(w, &p);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let mut jac = DMatrix::zeros(w.len(), 5);
        for j in 0..5 {
            let h = 1e-7 * (p[j].abs() + 1e-3);
            let mut q = p;
            q[j] += h;
            let rq = ellipse_residuals(w, &q);
            jac.set_column(j, &((rq - &r) / h));
        }
        let jt = jac.transpose();
        let a: Matrix5<f64> = (&jt * &jac).fixed_view::<5, 5>(0, 0).into();
        let g: Vector5<f64> = (&jt * &r).fixed_rows::<5>(0).into();
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = a;
            for i in 0..5 {
                damped[(i, i)] += lambda * a[(i, i)].max(1e-18);
            }
            let Some(step) = damped.lu().solve(&(-g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let rt = ellipse_residuals(w, &trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct < cost {
                let rel = (cost - ct) / cost.max(1e-300);
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 3.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    r.amax()
}

/// Largest orthogonal distance to the best-fitting ellipse.
fn ellipse_fit(w: &[Pt]) -> f64 {
    if w.len() < 6 {
        return f64::INFINITY;
    }
    let mut best = refine_ellipse(w, ellipse_from_moments(w));
    if let Some(p) = ellipse_from_conic(w) {
        best = best.min(refine_ellipse(w, p));
    }
    best
}

fn window_thickness(w: &[Pt]) -> f64 {
    graph_fit(w).min(conic_fit(w))
}

/// Largest window thickness along an ordered chain.
fn chain_thickness(chain: &[Pt], window: usize, period: f64, closed: bool) -> (f64, usize) {
    let k = chain.len();
    if k <= window {
        return (window_thickness(&unwrap(chain, period)), 1);
    }
    let starts = if closed { k } else { k - window + 1 };
    let worst = (0..starts)
        .map(|i| {
            let w: Vec<Pt> = (0..window).map(|j| chain[(i + j) % k]).collect();
            window_thickness(&unwrap(&w, period))
        })
        .fold(0.0, f64::max);
    (worst, starts)
}

/// Thickness of one orbit's section points, given in bounce order, with `s`
/// periodic with `period`. Distances are measured in the `(s, θ)` plane.
///
/// The points are threaded into a chain along the curves they lie on. An
/// orbit in an island chain returns to the same island every `q` bounces
/// (the smallest `q` for which every class of bounces modulo `q` stays on
/// one closed oval); each oval is ordered by angle about its centroid. Any
/// other orbit runs around the whole boundary and is ordered by `s`. Every
/// run of `window` consecutive chain points is fitted with a local curve
/// (the better of a quadratic graph in any direction and a conic), and an
/// oval with at most two windows' worth of points may instead be fitted
/// whole by an ellipse in orthogonal distance. The largest residual is
/// reported. An area-filling orbit gives thick windows.
pub fn curve_thickness(points: &[Pt], period: f64, window: usize) -> ThicknessReport {
    let window = window.max(6);
    let distinct = distinct_count(points, period);
    let mut report = ThicknessReport {
        max_thickness: 0.0,
        windows: 0,
        island_period: None,
        distinct_points: distinct,
        periodic: distinct < window,
    };
    if report.periodic {
        return report;
    }
    match island_period(points, period) {
        None => {
            let mut chain = points.to_vec();
            chain.sort_by(|a, b| a.0.rem_euclid(period).total_cmp(&b.0.rem_euclid(period)));
            let (t, count) = chain_thickness(&chain, window, period, true);
            report.max_thickness = t;
            report.windows = count;
        }
        Some(q) => {
            report.island_period = Some(q);
            let stretch = period / PI;
            for r in 0..q {
                let oval = unwrap(&class(points, r, q), period);
                let angles = polar_angles(&oval, stretch);
                let mut order: Vec<usize> = (0..oval.len()).collect();
                order.sort_by(|&i, &j| angles[i].total_cmp(&angles[j]));
                let chain: Vec<Pt> = order.iter().map(|&i| oval[i]).collect();
                let (mut t, count) = chain_thickness(&chain, window, period, true);
                if chain.len() <= 2 * window {
                    t = t.min(ellipse_fit(&chain));
                }
                report.max_thickness = report.max_thickness.max(t);
                report.windows += count;
            }
        }
    }
    report
}
