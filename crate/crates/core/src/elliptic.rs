//! Carlson symmetric integrals and the incomplete elliptic integral of the
//! second kind.

use crate::error::{domain, Result};

const ERRTOL: f64 = 1e-4;

/// Carlson's R_F(x, y, z). At most one argument may be zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let ave = (x + y + z) / 3.0;
        let dx = (ave - x) / ave;
        let dy = (ave - y) / ave;
        let dz = (ave - z) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / ave.sqrt();
        }
    }
}

/// Carlson's R_D(x, y, z). `x` and `y` may not both be zero; `z > 0`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lambda));
        fac *= 0.25;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let ave = 0.2 * (x + y + 3.0 * z);
        let dx = (ave - x) / ave;
        let dy = (ave - y) / ave;
        let dz = (ave - z) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            const C1: f64 = 3.0 / 14.0;
            const C2: f64 = 1.0 / 6.0;
            const C3: f64 = 9.0 / 22.0;
            const C4: f64 = 3.0 / 26.0;
            const C5: f64 = 0.25 * C3;
            const C6: f64 = 1.5 * C4;
            let series = 1.0
                + ed * (-C1 + C5 * ed - C6 * dz * ee)
                + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea));
            return 3.0 * sum + fac * series / (ave * ave.sqrt());
        }
    }
}

/// Incomplete elliptic integral of the second kind in Jacobi form,
///
/// ```text
///            x
///           ⌠  √(1 − k²t²)
/// E(x, k) = │  ─────────── dt ,   0 ≤ x ≤ 1,  0 ≤ k ≤ 1.
///           ⌡   √(1 − t²)
///           0
/// ```
///
/// With `x = sin φ` this is the Legendre integral `∫₀^φ √(1 − k² sin²θ) dθ`.
pub fn incomplete_elliptic_e(x: f64, k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&k) {
        return domain(
            "incomplete_elliptic_e",
            format!("need 0 <= x <= 1 and 0 <= k <= 1, got x = {x}, k = {k}"),
        );
    }
    Ok(elliptic_e_unchecked(x, k))
}

pub(crate) fn elliptic_e_unchecked(x: f64, k: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let q = (1.0 - x) * (1.0 + x);
    let kx = k * x;
    let r = (1.0 - kx) * (1.0 + kx);
    if q == 0.0 && r == 0.0 {
        // k = x = 1: E = 1.
        return 1.0;
    }
    x * carlson_rf(q, r, 1.0) - kx * kx * x / 3.0 * carlson_rd(q, r, 1.0)
}

/// Legendre form `E(φ | k) = ∫₀^φ √(1 − k² sin²θ) dθ` for any real φ.
pub fn legendre_e(phi: f64, k: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    // Reduce by the period: E(φ + mπ) = E(φ) + 2m E(π/2).
    let m = (phi / PI).round();
    let rem = phi - m * PI;
    let complete = if m != 0.0 {
        2.0 * m * elliptic_e_unchecked(1.0, k)
    } else {
        0.0
    };
    debug_assert!(rem.abs() <= FRAC_PI_2 + 1e-12);
    let part = elliptic_e_unchecked(rem.abs().sin().min(1.0), k);
    complete + rem.signum() * part
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use std::f64::consts::{FRAC_PI_2, PI};

    // Independent oracle: quadrature of the Legendre integrand (smooth,
    // no endpoint singularity) after substituting t = sin θ.
    fn oracle(x: f64, k: f64) -> f64 {
        let phi = x.asin();
        integrate(|t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-15).value
    }

    #[test]
    fn special_values() {
        assert_eq!(incomplete_elliptic_e(0.0, 0.3).unwrap(), 0.0);
        assert!((incomplete_elliptic_e(1.0, 0.0).unwrap() - FRAC_PI_2).abs() < 1e-14);
        assert!((incomplete_elliptic_e(1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_quadrature_oracle() {
        let k = 1.0 / 3f64.sqrt();
        let x = 1.0 / 3f64.sqrt();
        let e = incomplete_elliptic_e(x, k).unwrap();
        // Frozen from an mpmath evaluation (30 digits) of the defining integral.
        assert!((e - oracle(x, k)).abs() < 1e-13);
        assert!((e - 0.603_259_944_324_370_2).abs() < 1e-12, "{e:.17}");
        for &(x, k) in &[(0.1, 0.9), (0.5, 0.5), (0.99, 0.2), (0.7, 0.999)] {
            let e = incomplete_elliptic_e(x, k).unwrap();
            assert!((e - oracle(x, k)).abs() < 1e-12, "x={x} k={k}");
        }
    }

    #[test]
    fn zero_modulus_is_arcsin() {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert!((incomplete_elliptic_e(x, 0.0).unwrap() - x.asin()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(incomplete_elliptic_e(1.5, 0.5).is_err());
        assert!(incomplete_elliptic_e(0.5, -0.1).is_err());
    }

    #[test]
    fn legendre_form_is_odd_and_quasi_periodic() {
        let k = 0.6;
        let a = legendre_e(0.7, k);
        assert!((legendre_e(-0.7, k) + a).abs() < 1e-15);
        let full = legendre_e(FRAC_PI_2, k);
        assert!((legendre_e(PI + 0.7, k) - (2.0 * full + a)).abs() < 1e-13);
    }
}
