//! Linear stability of periodic orbits from the deviation (monodromy) matrix.
//!
//! Phase-space coordinates are `(s, cos θ)` with `θ` the outgoing angle to
//! the counterclockwise tangent; the billiard map preserves area in them, so
//! every block has unit determinant.

use serde::{Deserialize, Serialize};

use crate::dynamics::trace_from_boundary;
use crate::error::{domain, Error, Result};
use crate::periodic::PeriodicOrbit;
use crate::table::StringTable;

/// Default threshold on `||Tr| − 2|` below which an orbit is called neutral.
pub const TOL_NEUTRAL: f64 = 1e-6;

/// Determinant tolerance accepted by [`stability_class`].
pub const DET_TOL: f64 = 1e-9;

/// A 2×2 real matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl DeviationMatrix {
    pub const IDENTITY: DeviationMatrix = DeviationMatrix {
        m11: 1.0,
        m12: 0.0,
        m21: 0.0,
        m22: 1.0,
    };

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> DeviationMatrix {
        DeviationMatrix { m11, m12, m21, m22 }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &DeviationMatrix) -> DeviationMatrix {
        DeviationMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }

    pub fn pow(&self, e: u32) -> DeviationMatrix {
        (0..e).fold(DeviationMatrix::IDENTITY, |acc, _| acc.mul(self))
    }

    pub fn max_abs_diff(&self, other: &DeviationMatrix) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }
}

/// The block linearizing one chord from impact `i` to impact `k`.
///
/// `r_*` are radii of curvature at the impacts, `alpha_*` the angles of the
/// departing rays with the tangent and `rho` the chord length.
pub fn deviation_block(r_i: f64, r_k: f64, alpha_i: f64, alpha_k: f64, rho: f64) -> Result<DeviationMatrix> {
    let pi = std::f64::consts::PI;
    if !(r_i > 0.0 && r_k > 0.0) {
        return domain("deviation_block", "radii of curvature must be positive");
    }
    if !(alpha_i > 0.0 && alpha_i < pi && alpha_k > 0.0 && alpha_k < pi) {
        return domain("deviation_block", "angles must lie in (0, π)");
    }
    if !(rho >= 0.0) {
        return domain("deviation_block", "chord length must be non-negative");
    }
    let (si, sk) = (alpha_i.sin(), alpha_k.sin());
    Ok(DeviationMatrix {
        m11: -si / sk + rho / (r_i * sk),
        m12: -rho / (si * sk),
        m21: -rho / (r_i * r_k) + sk / r_i + si / r_k,
        m22: -sk / si + rho / (r_k * si),
    })
}

/// Geometry entering one block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactGeometry {
    /// Radius of curvature at the impact.
    pub r: f64,
    /// Angle of the departing ray with the tangent.
    pub alpha: f64,
    /// Length of the chord to the next impact.
    pub rho: f64,
}

/// Largest accepted reflection defect (radians) for a closed orbit.
const CLOSED_ORBIT_TOL: f64 = 1e-8;

/// Per-impact `(R, α, ρ)` of a periodic orbit, from the exact curvature.
pub fn impact_geometry(table: &StringTable, orbit: &PeriodicOrbit) -> Result<Vec<ImpactGeometry>> {
    let n = orbit.points.len();
    if n < 2 {
        return domain("deviation_matrix", "orbit needs at least two impacts");
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let p = &orbit.points[i];
        let prev = &orbit.points[(i + n - 1) % n];
        let next = &orbit.points[(i + 1) % n];
        let arc = table.arc(p.arc_id)?;
        let tangent = arc.tangent_at(p.t);
        let out_dir = (next.point - p.point).normalize();
        let in_dir = (p.point - prev.point).normalize();
        // Specular law: tangential components agree.
        let defect = (out_dir.dot(tangent) - in_dir.dot(tangent)).abs();
        if !(defect < CLOSED_ORBIT_TOL) {
            return domain(
                "deviation_matrix",
                format!("orbit is not closed: reflection defect {defect:.3e} at impact {i}"),
            );
        }
        out.push(ImpactGeometry {
            r: 1.0 / arc.curvature_at(p.t),
            alpha: tangent.angle_to(out_dir),
            rho: p.point.distance(next.point),
        });
    }
    Ok(out)
}

/// Blocks `M_{1,2}, M_{2,3}, …, M_{n,1}` of a periodic orbit.
pub fn deviation_blocks(table: &StringTable, orbit: &PeriodicOrbit) -> Result<Vec<DeviationMatrix>> {
    let g = impact_geometry(table, orbit)?;
    let n = g.len();
    (0..n)
        .map(|i| {
            let k = (i + 1) % n;
            deviation_block(g[i].r, g[k].r, g[i].alpha, g[k].alpha, g[i].rho)
        })
        .collect()
}

/// Deviation matrix of a periodic orbit: the Jacobian of the n-bounce
/// return map at `orbit.points[0]`.
///
/// Block `M_{i,k}` maps deviations at impact `i` to impact `k`, so the blocks
/// compose as `M_{n,1} ⋯ M_{2,3} M_{1,2}`. The reversed product
/// `M_{1,2} M_{2,3} ⋯ M_{n,1}` has the same trace only for special orbits,
/// e.g. when the blocks alternate between two matrices.
pub fn deviation_matrix(table: &StringTable, orbit: &PeriodicOrbit) -> Result<DeviationMatrix> {
    let blocks = deviation_blocks(table, orbit)?;
    Ok(compose(&blocks))
}

/// `B_{n−1} ⋯ B_1 B_0`.
pub fn compose(blocks: &[DeviationMatrix]) -> DeviationMatrix {
    blocks.iter().fold(DeviationMatrix::IDENTITY, |acc, b| b.mul(&acc))
}

/// Central-difference Jacobian of the return map in `(s, cos θ)` at
/// `orbit.points[0]`, with step `h` in both coordinates.
pub fn finite_difference_monodromy(table: &StringTable, orbit: &PeriodicOrbit, h: f64) -> Result<DeviationMatrix> {
    let n = orbit.points.len();
    let s0 = orbit.points[0].s;
    let p0 = orbit.thetas[0].cos();
    let big_l = table.boundary_length;
    let map = |s: f64, p: f64| -> Result<(f64, f64)> {
        if !(p > -1.0 && p < 1.0) {
            return domain("finite_difference_monodromy", "step leaves the phase space");
        }
        let tr = trace_from_boundary(table, s, p.acos(), n)?;
        let last = tr.bounces.last().expect("n >= 1");
        // Unwrap s back next to s0.
        let mut ds = (last.at.s - s0).rem_euclid(big_l);
        if ds > 0.5 * big_l {
            ds -= big_l;
        }
        Ok((s0 + ds, last.theta.cos()))
    };
    let (sp, pp) = map(s0 + h, p0)?;
    let (sm, pm) = map(s0 - h, p0)?;
    let (sq, pq) = map(s0, p0 + h)?;
    let (sr, pr) = map(s0, p0 - h)?;
    Ok(DeviationMatrix {
        m11: (sp - sm) / (2.0 * h),
        m12: (sq - sr) / (2.0 * h),
        m21: (pp - pm) / (2.0 * h),
        m22: (pq - pr) / (2.0 * h),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityTag {
    Stable,
    Unstable,
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub trace: f64,
    pub det: f64,
    pub tag: StabilityTag,
    pub tol_neutral: f64,
}

/// Classifies by `|Tr M|` against 2: neutral within `tol_neutral`.
pub fn stability_class(m: &DeviationMatrix, tol_neutral: f64) -> Result<StabilityReport> {
    let det = m.det();
    if !((det - 1.0).abs() <= DET_TOL) {
        return Err(Error::Integrity(format!("deviation matrix determinant {det} is not 1")));
    }
    if !(tol_neutral > 0.0) {
        return domain("stability_class", "tolerance must be positive");
    }
    let trace = m.trace();
    let tag = if (trace.abs() - 2.0).abs() <= tol_neutral {
        StabilityTag::Neutral
    } else if trace.abs() < 2.0 {
        StabilityTag::Stable
    } else {
        StabilityTag::Unstable
    };
    Ok(StabilityReport {
        trace,
        det,
        tag,
        tol_neutral,
    })
}

/// Full stability data for an orbit, as written by the command-line tool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityAnalysis {
    pub impacts: Vec<ImpactGeometry>,
    pub blocks: Vec<DeviationMatrix>,
    pub matrix: DeviationMatrix,
    pub report: StabilityReport,
}

pub fn analyze(table: &StringTable, orbit: &PeriodicOrbit, tol_neutral: f64) -> Result<StabilityAnalysis> {
    let impacts = impact_geometry(table, orbit)?;
    let blocks = deviation_blocks(table, orbit)?;
    let matrix = compose(&blocks);
    let report = stability_class(&matrix, tol_neutral)?;
    Ok(StabilityAnalysis {
        impacts,
        blocks,
        matrix,
        report,
    })
}
