//! Simultaneous polynomial root finding.
//!
//! Degree one is solved directly. Everything else goes through Durand–Kerner
//! (Weierstrass) iteration on the monic normalization, followed by a couple of
//! Newton polishing steps per root.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Backward-error residual `|p(z)| / max(1, Σ |a_i| |z|^i)`.
///
/// For polynomials with coefficients of order one this is just `|p(z)|`; the
/// scaling only kicks in when coefficients or roots are large.
pub fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let mut value = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let r = z.norm();
    for a in coeffs.iter().rev() {
        value = value * z + a;
        scale = scale * r + a.norm();
    }
    value.norm() / scale.max(1.0)
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All complex roots of `Σ coeffs[i] z^i`, with multiplicity.
///
/// `coeffs` is ascending and its last entry must be nonzero.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    match degree {
        0 => Ok(Vec::new()),
        1 => Ok(vec![-coeffs[0] / coeffs[1]]),
        _ => durand_kerner(coeffs),
    }
}

/// Roots of a quadratic `a z² + b z + c` by the cancellation-free formula.
///
/// Used on hot paths (inverse iteration) where the closed form is exact at
/// double roots and much cheaper than iteration.
pub fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that avoids subtracting nearly equal numbers.
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        // b = 0 and c = 0: double root at the origin.
        return [Complex64::new(0.0, 0.0); 2];
    }
    [q / a, c / q]
}

pub fn durand_kerner(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len() - 1;
    let lead = coeffs[degree];
    let monic: Vec<Complex64> = coeffs.iter().map(|a| a / lead).collect();

    // Cauchy bound on root moduli sets the scale of the starting points.
    let bound = 1.0
        + monic[..degree]
            .iter()
            .map(|a| a.norm())
            .fold(0.0_f64, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| seed.powu(k as u32) * (0.5 * bound))
        .collect();

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut max_step = 0.0_f64;
        for i in 0..degree {
            let (p, _) = horner(&monic, z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    denom *= z[i] - zj;
                }
            }
            if denom.norm() == 0.0 {
                // Coincident iterates; nudge apart.
                let nudge = Complex64::new(1e-12, 1e-12) * (1.0 + z[i].norm());
                z[i] += nudge;
                continue;
            }
            let step = p / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        let worst = z
            .iter()
            .map(|&r| relative_residual(coeffs, r))
            .fold(0.0_f64, f64::max);
        if worst < 1e-15 || max_step < 1e-16 {
            break;
        }
    }

    for r in z.iter_mut() {
        polish(coeffs, r);
    }

    let worst = z
        .iter()
        .map(|&r| relative_residual(coeffs, r))
        .fold(0.0_f64, f64::max);
    if !worst.is_finite() || worst >= RESIDUAL_TOLERANCE {
        return Err(Error::RootsNotConverged {
            iterations,
            residual: worst,
        });
    }
    Ok(z)
}

/// Two Newton steps, each kept only if it lowers the residual.
fn polish(coeffs: &[Complex64], root: &mut Complex64) {
    for _ in 0..2 {
        let (p, dp) = horner(coeffs, *root);
        if dp.norm() == 0.0 {
            return;
        }
        let candidate = *root - p / dp;
        if relative_residual(coeffs, candidate) < relative_residual(coeffs, *root) {
            *root = candidate;
        } else {
            return;
        }
    }
}
