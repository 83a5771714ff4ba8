//! Periodic orbits: symmetric star polygons, Newton search on the perimeter
//! functional, Birkhoff pairs and symmetry-aware deduplication.
//!
//! An n-periodic orbit with rotation number k is a critical point of the
//! perimeter of inscribed n-gons whose vertices advance k times around the
//! boundary. Vertices are parametrized by lifted arc length `σ_i` with
//! `σ_{i+1} > σ_i` and `σ_n = σ_0 + kL`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{trace, TableId};
use crate::error::{domain, Error, Result};
use crate::geometry::BoundaryPoint;
use crate::stability::{deviation_matrix, stability_class, StabilityReport, TOL_NEUTRAL};
use crate::table::StringTable;
use crate::vec2::Vec2;

/// Newton stops once every component of the perimeter gradient is below this.
pub const GRADIENT_TOL: f64 = 1e-11;
/// Accepted orbits return to their start within this after one period.
pub const CLOSURE_TOL: f64 = 1e-10;
/// Quantum of the canonical key.
pub const KEY_QUANTUM: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub table: TableId,
    pub n: usize,
    pub k: usize,
    pub boundary_length: f64,
    pub points: Vec<BoundaryPoint>,
    /// Outgoing angle at each vertex.
    pub thetas: Vec<f64>,
    pub chord_lengths: Vec<f64>,
    pub perimeter: f64,
    /// Largest perimeter-gradient component (the reflection defect).
    pub reflection_defect: f64,
    /// Max of position and direction gap after tracing one period.
    pub closure_residual: f64,
    pub stability: Option<StabilityReport>,
}

impl PeriodicOrbit {
    /// Lifted coordinates `σ_i`, increasing, with total advance `kL`.
    pub fn lift(&self) -> Vec<f64> {
        lift_of(&self.points.iter().map(|p| p.s).collect::<Vec<_>>(), self.boundary_length)
    }

    pub fn vertices(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| p.point).collect()
    }
}

fn lift_of(s: &[f64], big_l: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.len());
    let mut acc = s[0];
    out.push(acc);
    for w in s.windows(2) {
        let gap = (w[1] - w[0]).rem_euclid(big_l);
        acc += gap;
        out.push(acc);
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn totient(n: usize) -> usize {
    (1..=n).filter(|&k| gcd(n, k) == 1).count()
}

/// `6/gcd(6, n) · φ(n)`: the number of n-periodic orbits on the hexagonal
/// table predicted by Birkhoff's theorem and the six-fold rotation symmetry.
pub fn orbit_count(n: usize) -> Result<usize> {
    if n < 3 {
        return domain("orbit_count", format!("n = {n}: need n >= 3"));
    }
    Ok(6 / gcd(6, n) * totient(n))
}

/// Perimeter, its gradient and Hessian at lifted coordinates `sigma`.
struct Evaluation {
    points: Vec<BoundaryPoint>,
    perimeter: f64,
    gradient: DVector<f64>,
    hessian: DMatrix<f64>,
}

fn evaluate(table: &StringTable, sigma: &[f64]) -> Evaluation {
    let n = sigma.len();
    let points: Vec<BoundaryPoint> = sigma.iter().map(|&s| table.point_at_s(s)).collect();
    let frames: Vec<(Vec2, Vec2, f64)> = points
        .iter()
        .map(|p| {
            let arc = &table.arcs[p.arc_id];
            let t = arc.tangent_at(p.t);
            (t, t.perp(), arc.curvature_at(p.t))
        })
        .collect();
    let mut gradient = DVector::zeros(n);
    let mut hessian = DMatrix::zeros(n, n);
    let mut perimeter = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let d = points[j].point - points[i].point;
        let rho = d.hypot();
        let e = d / rho;
        perimeter += rho;
        let (tp, np, kp) = frames[i];
        let (tq, nq, kq) = frames[j];
        let (cp, cq) = (tp.dot(e), tq.dot(e));
        gradient[i] -= cp;
        gradient[j] += cq;
        hessian[(i, i)] += (1.0 - cp * cp) / rho - kp * np.dot(e);
        hessian[(j, j)] += (1.0 - cq * cq) / rho + kq * nq.dot(e);
        let mixed = -(tp.dot(tq) - cp * cq) / rho;
        if n == 2 {
            hessian[(i, j)] += mixed;
        } else {
            hessian[(i, j)] += mixed;
            hessian[(j, i)] += mixed;
        }
    }
    if n == 2 {
        // Both chords join the same two vertices.
        let m = hessian[(0, 1)] + hessian[(1, 0)];
        hessian[(0, 1)] = m;
        hessian[(1, 0)] = m;
    }
    Evaluation {
        points,
        perimeter,
        gradient,
        hessian,
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Whether consecutive lifted vertices stay strictly ordered and distinct.
fn ordered(sigma: &[f64], total: f64, min_gap: f64) -> bool {
    let n = sigma.len();
    (0..n).all(|i| {
        let next = if i + 1 < n { sigma[i + 1] } else { sigma[0] + total };
        next - sigma[i] > min_gap
    })
}

/// Newton iteration on the perimeter gradient. Returns lifted coordinates.
fn newton(table: &StringTable, seed: Vec<f64>, total: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = seed.len();
    let min_gap = 1e-6 * table.boundary_length;
    let mut sigma = seed;
    let mut eval = evaluate(table, &sigma);
    let mut gmax = max_abs(&eval.gradient);
    let mut polish = 0;
    for _ in 0..max_iter {
        if gmax < GRADIENT_TOL {
            // A couple of extra steps take the defect down to rounding level.
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        let svd = eval.hessian.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let step = match svd.solve(&(-&eval.gradient), smax * 1e-14) {
            Ok(s) => s,
            Err(e) => return Err(Error::SearchFailure(format!("linear solve failed: {e}"))),
        };
        let limit = 0.5 * table.boundary_length / n as f64;
        let scale = (limit / max_abs(&step)).min(1.0);
        let mut lambda = scale;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = sigma.iter().zip(step.iter()).map(|(s, d)| s + lambda * d).collect();
            if ordered(&trial, total, min_gap) {
                let e = evaluate(table, &trial);
                let g = max_abs(&e.gradient);
                if g < gmax || (gmax < GRADIENT_TOL && g <= 2.0 * gmax) {
                    sigma = trial;
                    eval = e;
                    gmax = g;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if gmax < GRADIENT_TOL {
                break;
            }
            return Err(Error::SearchFailure(format!(
                "line search stalled with gradient {gmax:.3e}"
            )));
        }
    }
    if gmax < GRADIENT_TOL {
        Ok(sigma)
    } else {
        Err(Error::SearchFailure(format!(
            "no convergence in {max_iter} iterations (gradient {gmax:.3e})"
        )))
    }
}

/// Assembles an orbit from converged lifted coordinates and checks closure
/// by tracing one period.
fn orbit_from_lift(table: &StringTable, k: usize, sigma: &[f64]) -> Result<PeriodicOrbit> {
    let n = sigma.len();
    let eval = evaluate(table, sigma);
    let points = eval.points;
    let mut thetas = Vec::with_capacity(n);
    let mut chord_lengths = Vec::with_capacity(n);
    for i in 0..n {
        let p = &points[i];
        let q = &points[(i + 1) % n];
        let tangent = table.arcs[p.arc_id].tangent_at(p.t);
        thetas.push(tangent.angle_to(q.point - p.point));
        chord_lengths.push(p.point.distance(q.point));
    }
    let dir0 = (points[1 % n].point - points[0].point).normalize();
    let tr = trace(table, points[0].point, dir0, n)?;
    let last = tr.bounces.last().expect("n >= 1");
    let closure_residual = last
        .at
        .point
        .distance(points[0].point)
        .max(last.outgoing.distance(dir0));
    Ok(PeriodicOrbit {
        table: table.into(),
        n,
        k,
        boundary_length: table.boundary_length,
        points,
        thetas,
        chord_lengths,
        perimeter: eval.perimeter,
        reflection_defect: max_abs(&eval.gradient),
        closure_residual,
        stability: None,
    })
}

/// Smallest proper period `d | n` with `points[i + d] = points[i]`.
fn primitive_period(points: &[BoundaryPoint], tol: f64) -> usize {
    let n = points.len();
    (1..n)
        .filter(|d| n % d == 0)
        .find(|&d| (0..n).all(|i| points[i].point.distance(points[(i + d) % n].point) < tol))
        .unwrap_or(n)
}

fn attach_stability(table: &StringTable, mut orbit: PeriodicOrbit) -> PeriodicOrbit {
    orbit.stability = deviation_matrix(table, &orbit)
        .and_then(|m| stability_class(&m, TOL_NEUTRAL))
        .ok();
    orbit
}

/// Searches for an `(n, k)` orbit from seed arc-length coordinates.
///
/// The seed must go around the boundary exactly `k` times in order. The
/// result has reflection defect below [`GRADIENT_TOL`] and closure residual
/// below [`CLOSURE_TOL`]; convergence onto a shorter orbit traversed
/// repeatedly is reported as [`Error::WrongOrbit`].
pub fn find_periodic_orbit(table: &StringTable, n: usize, k: usize, seed: &[f64]) -> Result<PeriodicOrbit> {
    if n < 2 || k < 1 || k >= n {
        return domain("find_periodic_orbit", format!("need n >= 2 and 1 <= k < n, got ({n}, {k})"));
    }
    if seed.len() != n {
        return domain("find_periodic_orbit", format!("seed has {} points, expected {n}", seed.len()));
    }
    let big_l = table.boundary_length;
    let lifted = lift_of(seed, big_l);
    let total = k as f64 * big_l;
    let advance = lifted[n - 1] - lifted[0] + (seed[0] - seed[n - 1]).rem_euclid(big_l);
    if (advance - total).abs() > 1e-9 * big_l {
        return domain(
            "find_periodic_orbit",
            format!("seed winds {:.3} times, expected {k}", advance / big_l),
        );
    }
    let sigma = newton(table, lifted, total, 60)?;
    let orbit = orbit_from_lift(table, k, &sigma)?;
    let period = primitive_period(&orbit.points, 1e-7);
    if period < n {
        return Err(Error::WrongOrbit {
            n,
            k,
            found_n: period,
            found_k: k * period / n,
        });
    }
    if !(orbit.closure_residual < CLOSURE_TOL) {
        return Err(Error::SearchFailure(format!(
            "closure residual {:.3e} after one period",
            orbit.closure_residual
        )));
    }
    Ok(attach_stability(table, orbit))
}

/// Equally spaced seed `σ_i = σ_0 + i·kL/n`.
pub fn rotation_seed(table: &StringTable, n: usize, k: usize, s0: f64) -> Vec<f64> {
    let step = k as f64 * table.boundary_length / n as f64;
    (0..n)
        .map(|i| (s0 + i as f64 * step).rem_euclid(table.boundary_length))
        .collect()
}

/// Orbit through the `2n` points where the symmetry axes meet the boundary,
/// joining every `k`-th one, starting from axis point `start`. Even indices
/// are arc midpoints, odd ones junctions.
pub fn symmetric_orbit_from(table: &StringTable, k: usize, start: usize) -> Result<PeriodicOrbit> {
    let m = 2 * table.n;
    if k < 1 || k > table.n {
        return domain("symmetric_orbit", format!("k = {k} outside 1..={}", table.n));
    }
    let g = gcd(m, k);
    let n = m / g;
    let big_l = table.boundary_length;
    let sigma: Vec<f64> = (0..n)
        .map(|i| (start + i * k) as f64 * big_l / m as f64)
        .collect();
    let orbit = orbit_from_lift(table, k / g, &sigma)?;
    if !(orbit.closure_residual < CLOSURE_TOL) {
        return Err(Error::Integrity(format!(
            "symmetric orbit ({m}, {k}) fails to close: residual {:.3e}",
            orbit.closure_residual
        )));
    }
    Ok(attach_stability(table, orbit))
}

/// The symmetric orbit `{2n/k}` started at the first junction, so that for
/// the hexagon `k = 4` gives the junction triangle.
pub fn symmetric_orbit(table: &StringTable, k: usize) -> Result<PeriodicOrbit> {
    symmetric_orbit_from(table, k, 1)
}

/// Canonical form of an orbit modulo the dihedral symmetry of the table and
/// relabeling: the vertex arc lengths of the lexicographically smallest
/// symmetry image, sorted and quantized to [`KEY_QUANTUM`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitKey {
    pub n: usize,
    /// `min(k, n − k)`: reversal maps rotation number k to n − k.
    pub k: usize,
    pub quantized: Vec<i64>,
}

fn snap(s: f64, big_l: f64) -> f64 {
    let s = s.rem_euclid(big_l);
    if big_l - s < 1e-9 {
        0.0
    } else {
        s
    }
}

/// All `2N` symmetry images of the vertex set as sorted arc-length lists.
fn images(orbit: &PeriodicOrbit) -> Vec<Vec<f64>> {
    let big_l = orbit.boundary_length;
    let order = orbit.table.n;
    let mut out = Vec::with_capacity(2 * order);
    for r in 0..order {
        let shift = r as f64 * big_l / order as f64;
        for reflect in [false, true] {
            let mut v: Vec<f64> = orbit
                .points
                .iter()
                .map(|p| snap(if reflect { -p.s } else { p.s } + shift, big_l))
                .collect();
            v.sort_by(f64::total_cmp);
            out.push(v);
        }
    }
    out
}

fn lex_less(a: &[f64], b: &[f64], tol: f64) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol {
            return x < y;
        }
    }
    false
}

/// Whether two sorted vertex lists describe the same point set on the circle
/// of length `big_l`.
fn same_set(a: &[f64], b: &[f64], big_l: f64, tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| {
            b.iter().any(|y| {
                let d = (x - y).rem_euclid(big_l);
                d.min(big_l - d) < tol
            })
        })
}

pub fn canonical_form(orbit: &PeriodicOrbit) -> OrbitKey {
    let imgs = images(orbit);
    let mut best = &imgs[0];
    for img in &imgs[1..] {
        if lex_less(img, best, 1e-9) {
            best = img;
        }
    }
    OrbitKey {
        n: orbit.n,
        k: orbit.k.min(orbit.n - orbit.k),
        quantized: best.iter().map(|s| (s / KEY_QUANTUM).round() as i64).collect(),
    }
}

/// Whether two orbits coincide up to a symmetry of the table.
pub fn same_orbit(a: &PeriodicOrbit, b: &PeriodicOrbit) -> bool {
    if a.n != b.n || a.k.min(a.n - a.k) != b.k.min(b.n - b.k) {
        return false;
    }
    let mut sb: Vec<f64> = b.points.iter().map(|p| snap(p.s, b.boundary_length)).collect();
    sb.sort_by(f64::total_cmp);
    images(a)
        .iter()
        .any(|img| same_set(img, &sb, a.boundary_length, 1e3 * KEY_QUANTUM))
}

/// Number of distinct orbits among the symmetry images of `orbit`.
pub fn symmetry_copies(orbit: &PeriodicOrbit) -> usize {
    let imgs = images(orbit);
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for img in &imgs {
        if !distinct
            .iter()
            .any(|d| same_set(d, img, orbit.boundary_length, 1e3 * KEY_QUANTUM))
        {
            distinct.push(img);
        }
    }
    distinct.len()
}

/// Seeds for an `(n, k)` search: equally spaced configurations at `grid`
/// offsets across one symmetry sector, plus `random` jittered ones.
fn seeds(table: &StringTable, n: usize, k: usize, grid: usize, random: usize, rng_seed: u64) -> Vec<Vec<f64>> {
    let sector = table.boundary_length / table.n as f64;
    let mut out: Vec<Vec<f64>> = (0..grid)
        .map(|i| rotation_seed(table, n, k, sector * i as f64 / grid as f64))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let step = k as f64 * table.boundary_length / n as f64;
    for _ in 0..random {
        let s0 = rng.random_range(0.0..sector);
        let mut v = rotation_seed(table, n, k, s0);
        for x in v.iter_mut() {
            *x = (*x + rng.random_range(-0.2..0.2) * step).rem_euclid(table.boundary_length);
        }
        out.push(v);
    }
    out
}

/// Runs Newton from every seed in parallel and keeps one representative per
/// symmetry class, in seed order.
pub fn search_distinct(table: &StringTable, n: usize, k: usize, seeds: &[Vec<f64>]) -> Vec<PeriodicOrbit> {
    let found: Vec<Option<PeriodicOrbit>> = seeds
        .par_iter()
        .map(|seed| find_periodic_orbit(table, n, k, seed).ok())
        .collect();
    let mut distinct: Vec<PeriodicOrbit> = Vec::new();
    for orbit in found.into_iter().flatten() {
        if !distinct.iter().any(|d| same_orbit(d, &orbit)) {
            distinct.push(orbit);
        }
    }
    distinct
}

/// The perimeter-maximizing `(n, k)` orbit and a geometrically distinct
/// second one (the lowest-perimeter critical orbit found).
pub fn birkhoff_pair(table: &StringTable, n: usize, k: usize) -> Result<(PeriodicOrbit, PeriodicOrbit)> {
    if gcd(n, k) != 1 || 2 * k >= n {
        return domain("birkhoff_pair", format!("need gcd(n, k) = 1 and k < n/2, got ({n}, {k})"));
    }
    let seeds = seeds(table, n, k, 48, 0, 0);
    let mut found = search_distinct(table, n, k, &seeds);
    if found.len() < 2 {
        return Err(Error::SearchFailure(format!(
            "found {} distinct ({n}, {k}) orbit(s), need two",
            found.len()
        )));
    }
    found.sort_by(|a, b| b.perimeter.total_cmp(&a.perimeter));
    let second = found.pop().expect("len >= 2");
    let first = found.swap_remove(0);
    Ok((first, second))
}

/// Orbits found by an exhaustive seed sweep at period `n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitCensus {
    pub n: usize,
    /// One representative per symmetry class, for each admissible k.
    pub classes: Vec<PeriodicOrbit>,
    /// Number of symmetry images of each class.
    pub copies: Vec<usize>,
    /// Sum of `copies`.
    pub total: usize,
    /// Value of [`orbit_count`] for comparison.
    pub formula: usize,
}

/// Sweeps seeds for every `k < n/2` coprime to `n`, deduplicates modulo
/// symmetry and counts symmetry images.
pub fn orbit_census(table: &StringTable, n: usize, grid: usize, random: usize, rng_seed: u64) -> Result<OrbitCensus> {
    let formula = orbit_count(n)?;
    let mut classes = Vec::new();
    for k in (1..n).filter(|&k| 2 * k < n && gcd(n, k) == 1) {
        let s = seeds(table, n, k, grid, random, rng_seed.wrapping_add(k as u64));
        classes.extend(search_distinct(table, n, k, &s));
    }
    let copies: Vec<usize> = classes.iter().map(symmetry_copies).collect();
    Ok(OrbitCensus {
        n,
        total: copies.iter().sum(),
        classes,
        copies,
        formula,
    })
}

/// Rotation number of the return map around a stable periodic orbit, as a
/// function of the initial distance from it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IslandProfile {
    /// Offsets along the linear eigen-direction, in `(s, cos θ)` units.
    pub radii: Vec<f64>,
    /// Mean rotation per return, in turns.
    pub rotation: Vec<f64>,
    /// Rotation number of the linearization, `ω/2π` with `cos ω = Tr/2`.
    pub linear_rotation: f64,
}

/// Normal-form frame of a stable base orbit.
struct EllipticFrame {
    s0: f64,
    p0: f64,
    /// Columns: real and imaginary parts of the eigenvector.
    re: (f64, f64),
    im: (f64, f64),
    omega: f64,
}

impl EllipticFrame {
    fn new(table: &StringTable, base: &PeriodicOrbit) -> Result<EllipticFrame> {
        let m = deviation_matrix(table, base)?;
        let c = 0.5 * m.trace();
        if !(c.abs() < 1.0) {
            return domain("island_profile", format!("base orbit is not stable (trace {})", m.trace()));
        }
        let sn = (1.0 - c * c).sqrt();
        Ok(EllipticFrame {
            s0: base.points[0].s,
            p0: base.thetas[0].cos(),
            re: (m.m12, c - m.m11),
            im: (0.0, sn),
            omega: c.acos(),
        })
    }

    /// Phase-space point at normal-form coordinates `(x, y)`.
    fn state(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.s0 + x * self.re.0 + y * self.im.0,
            self.p0 + x * self.re.1 + y * self.im.1,
        )
    }

    /// Normal-form coordinates of a phase-space point.
    fn coords(&self, ds: f64, dp: f64) -> (f64, f64) {
        let det = self.re.0 * self.im.1 - self.im.0 * self.re.1;
        (
            (ds * self.im.1 - dp * self.im.0) / det,
            (self.re.0 * dp - self.re.1 * ds) / det,
        )
    }
}

/// Iterates the `n0`-bounce return map from normal-form radius `r` and
/// returns the mean rotation per return, or `None` if the orbit leaves the
/// neighbourhood of the base orbit.
fn mean_rotation(table: &StringTable, frame: &EllipticFrame, n0: usize, r: f64, returns: usize) -> Option<f64> {
    let big_l = table.boundary_length;
    let (mut s, mut p) = frame.state(r, 0.0);
    let mut angle = 0.0;
    let mut total = 0.0;
    for _ in 0..returns {
        if !(p > -1.0 && p < 1.0) {
            return None;
        }
        let tr = crate::dynamics::trace_from_boundary(table, s, p.acos(), n0).ok()?;
        let last = tr.bounces.last()?;
        let mut ds = (last.at.s - frame.s0).rem_euclid(big_l);
        if ds > 0.5 * big_l {
            ds -= big_l;
        }
        s = frame.s0 + ds;
        p = last.theta.cos();
        let (x, y) = frame.coords(ds, p - frame.p0);
        if x.hypot(y) > 10.0 * r {
            return None;
        }
        let a = y.atan2(x);
        let mut d = a - angle;
        d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
        total += d;
        angle = a;
    }
    // The linear map turns clockwise in this frame.
    Some(-total / (std::f64::consts::TAU * returns as f64))
}

/// Samples the rotation number of invariant curves around a stable orbit.
pub fn island_profile(table: &StringTable, base: &PeriodicOrbit, radii: &[f64], returns: usize) -> Result<IslandProfile> {
    let frame = EllipticFrame::new(table, base)?;
    let n0 = base.n;
    let rotation: Vec<Option<f64>> = radii
        .par_iter()
        .map(|&r| mean_rotation(table, &frame, n0, r, returns))
        .collect();
    let keep = rotation.iter().take_while(|x| x.is_some()).count();
    Ok(IslandProfile {
        radii: radii[..keep].to_vec(),
        rotation: rotation[..keep].iter().map(|x| x.expect("kept")).collect(),
        linear_rotation: frame.omega / std::f64::consts::TAU,
    })
}

/// Searches for a periodic orbit in a resonant island chain of order `q`
/// around the stable orbit `base`: period `q·n₀`, rotation number `q·k₀`.
///
/// The radius where the rotation number of invariant curves crosses some
/// `p/q` is located by bisection, then the trajectory started there seeds a
/// Newton search.
pub fn find_resonant_orbit(table: &StringTable, base: &PeriodicOrbit, q: usize) -> Result<PeriodicOrbit> {
    if q < 2 {
        return domain("find_resonant_orbit", "resonance order must be at least 2");
    }
    let frame = EllipticFrame::new(table, base)?;
    let n0 = base.n;
    let returns = 400;
    let radii: Vec<f64> = (1..=60).map(|i| 2e-4 * 1.12f64.powi(i)).collect();
    let profile = island_profile(table, base, &radii, returns)?;
    if profile.rotation.len() < 2 {
        return Err(Error::SearchFailure("no invariant curves around the base orbit".into()));
    }
    let nu0 = profile.rotation[0];
    // First crossing of a fraction p/q with gcd(p, q) = 1 along the profile.
    let mut bracket = None;
    'outer: for j in 1..profile.rotation.len() {
        let (a, b) = (profile.rotation[j - 1], profile.rotation[j]);
        let lo = a.min(b).min(nu0);
        let hi = a.max(b).max(nu0);
        for p in (1..q).filter(|&p| gcd(p, q) == 1) {
            let target = p as f64 / q as f64;
            if target > lo && target < hi && (a - target) * (b - target) <= 0.0 {
                bracket = Some((profile.radii[j - 1], profile.radii[j], target));
                break 'outer;
            }
        }
    }
    let Some((mut r_lo, mut r_hi, target)) = bracket else {
        return Err(Error::SearchFailure(format!(
            "no rotation number p/{q} between {:.6} and {:.6}",
            profile.rotation.first().unwrap(),
            profile.rotation.last().unwrap()
        )));
    };
    let sign_lo = (mean_rotation(table, &frame, n0, r_lo, returns).unwrap_or(target) - target).signum();
    for _ in 0..40 {
        let mid = 0.5 * (r_lo + r_hi);
        match mean_rotation(table, &frame, n0, mid, returns) {
            Some(nu) if (nu - target).signum() == sign_lo => r_lo = mid,
            _ => r_hi = mid,
        }
    }
    let n = q * n0;
    let k = q * base.k;
    let mut last_err = Error::SearchFailure("no attempt made".into());
    for attempt in 0..8 {
        let r = 0.5 * (r_lo + r_hi) * (1.0 + 0.01 * attempt as f64);
        let phase = attempt as f64 * std::f64::consts::PI / (4.0 * q as f64);
        let (s, p) = frame.state(r * phase.cos(), r * phase.sin());
        if !(p > -1.0 && p < 1.0) {
            continue;
        }
        let tr = crate::dynamics::trace_from_boundary(table, s, p.acos(), n - 1)?;
        let mut seed = Vec::with_capacity(n);
        seed.push(s.rem_euclid(table.boundary_length));
        seed.extend(tr.bounces.iter().map(|b| b.at.s));
        match find_periodic_orbit(table, n, k, &seed) {
            Ok(orbit) => return Ok(orbit),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}
