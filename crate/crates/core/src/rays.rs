//! Exact angle arithmetic under `θ ↦ dθ` and numerical external rays.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::maps::PolynomialMap;

pub const LANDING_TOLERANCE: f64 = 1e-9;
/// Consecutive level differences below [`LANDING_TOLERANCE`] needed to
/// declare landing.
pub const LANDING_STREAK: usize = 3;
pub const DEFAULT_LEVELS: usize = 200;
pub const DEFAULT_STEPS_PER_LEVEL: usize = 8;
/// Fraction of the predicted step a Newton correction may use before the
/// step is treated as a branch jump.
pub const BRANCH_GUARD: f64 = 0.5;
const MAX_HALVINGS: u32 = 24;
const NEWTON_STEPS: usize = 60;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A rational angle `numerator/denominator` mod 1, always reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Angle {
    numerator: u64,
    denominator: u64,
}

impl Angle {
    pub fn new(numerator: i64, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidArgument("angle denominator must be positive".into()));
        }
        let n = numerator.rem_euclid(denominator as i64) as u64;
        Ok(Self::reduced(n, denominator))
    }

    pub fn zero() -> Self {
        Self {
            numerator: 0,
            denominator: 1,
        }
    }

    fn reduced(n: u64, d: u64) -> Self {
        let g = gcd(n, d).max(1);
        Self {
            numerator: n / g,
            denominator: d / g,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `self · factor` mod 1, exactly.
    pub fn times(&self, factor: u64) -> Self {
        let n = (self.numerator as u128 * factor as u128) % self.denominator as u128;
        Self::reduced(n as u64, self.denominator)
    }

    /// `e^{2πiθ}`.
    pub fn unit(&self) -> Complex64 {
        // Reduce before scaling so large numerators keep full precision.
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.to_f64())
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse angle '{s}' (expected p/q)"));
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: u64 = q.trim().parse().map_err(|_| bad())?;
                Angle::new(p, q)
            }
            None => {
                let p: i64 = s.parse().map_err(|_| bad())?;
                Angle::new(p, 1)
            }
        }
    }
}

/// A periodic cycle of angles under multiplication by `degree`, sorted
/// counterclockwise from the smallest angle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleCycle {
    pub angles: Vec<Angle>,
    pub degree: u64,
}

/// Forward orbit of `theta` under `θ ↦ dθ` until it closes up.
pub fn angle_cycle(theta: Angle, degree: u64) -> Result<AngleCycle> {
    if degree < 2 {
        return Err(Error::InvalidArgument("degree must be at least 2".into()));
    }
    let mut orbit = vec![theta];
    loop {
        let next = orbit.last().unwrap().times(degree);
        if let Some(first) = orbit.iter().position(|a| *a == next) {
            if first != 0 {
                return Err(Error::PreperiodicAngle {
                    angle: theta.to_string(),
                    degree,
                    preperiod: first,
                });
            }
            break;
        }
        orbit.push(next);
    }
    orbit.sort();
    Ok(AngleCycle {
        angles: orbit,
        degree,
    })
}

/// Combinatorial rotation number `p/q`: multiplication by the degree moves
/// every angle of the (circularly ordered) cycle `p` places forward.
pub fn rotation_number(cycle: &AngleCycle) -> Result<Angle> {
    let mut angles = cycle.angles.clone();
    angles.sort();
    angles.dedup();
    let q = angles.len();
    if q == 0 {
        return Err(Error::NotRotationCycle("empty cycle".into()));
    }
    if q != cycle.angles.len() {
        return Err(Error::NotRotationCycle("repeated angles".into()));
    }
    let index_of = |a: Angle| angles.iter().position(|b| *b == a);
    let mut shift = None;
    for (i, a) in angles.iter().enumerate() {
        let image = a.times(cycle.degree);
        let j = index_of(image)
            .ok_or_else(|| Error::NotRotationCycle(format!("{a} maps to {image}, outside the cycle")))?;
        let s = (j + q - i) % q;
        match shift {
            None => shift = Some(s),
            Some(prev) if prev != s => {
                return Err(Error::NotRotationCycle(
                    "multiplication does not act as a rotation on the cyclic order".into(),
                ))
            }
            _ => {}
        }
    }
    Angle::new(shift.unwrap_or(0) as i64, q as u64)
}

/// Points on an external ray at potentials `G₀ / d^k`, `k = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayTrace {
    pub angle: Angle,
    pub points: Vec<Complex64>,
    pub landing_estimate: Complex64,
    pub converged: bool,
    pub diagnostic: Option<String>,
}

/// Affine change of variable `z = scale·w + shift` taking a polynomial to
/// monic centered form.
struct Normalization {
    monic: PolynomialMap,
    scale: Complex64,
    shift: Complex64,
}

fn normalize(poly: &PolynomialMap) -> Result<Normalization> {
    let d = poly.degree();
    if d < 2 {
        return Err(Error::InvalidMap("ray tracing needs degree at least 2".into()));
    }
    let coeffs = poly.coefficients();
    let lead = poly.leading();
    let shift = -coeffs[d - 1] / (lead * d as f64);
    let scale = lead.powf(-1.0 / (d as f64 - 1.0));
    // Q(w) = (P(scale·w + shift) - shift) / scale, expanded by Horner on
    // polynomials in w.
    let linear = PolynomialMap::new(vec![shift, scale])?;
    let mut acc = PolynomialMap::new(vec![coeffs[d]])?;
    for a in coeffs[..d].iter().rev() {
        let mut next = acc.mul(&linear).coefficients().to_vec();
        next[0] += a;
        acc = PolynomialMap::new(next)?;
    }
    let mut c = acc.coefficients().to_vec();
    c[0] -= shift;
    let c: Vec<Complex64> = c.into_iter().map(|a| a / scale).collect();
    let mut monic = c;
    monic[d] = Complex64::new(1.0, 0.0);
    monic[d - 1] = Complex64::new(0.0, 0.0);
    Ok(Normalization {
        monic: PolynomialMap::new(monic)?,
        scale,
        shift,
    })
}

/// `P^k(z)` and its derivative.
fn iterate(poly: &PolynomialMap, z: Complex64, k: usize) -> (Complex64, Complex64) {
    let mut w = z;
    let mut dw = Complex64::new(1.0, 0.0);
    for _ in 0..k {
        let (p, dp) = poly.eval_with_derivative(w);
        dw *= dp;
        w = p;
    }
    (w, dw)
}

/// Newton's method for `P^k(z) = target` from `guess`.
fn newton_preimage(poly: &PolynomialMap, k: usize, target: Complex64, guess: Complex64) -> Option<Complex64> {
    let mut z = guess;
    for _ in 0..NEWTON_STEPS {
        let (w, dw) = iterate(poly, z, k);
        if !w.is_finite() || !dw.is_finite() || dw.norm() == 0.0 {
            return None;
        }
        let step = (w - target) / dw;
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    let (w, _) = iterate(poly, z, k);
    ((w - target).norm() <= 1e-10 * target.norm()).then_some(z)
}

/// `trace_ray` with the default level cap and substep count.
pub fn trace_ray_default(poly: &PolynomialMap, theta: Angle) -> Result<RayTrace> {
    trace_ray(poly, theta, DEFAULT_LEVELS, DEFAULT_STEPS_PER_LEVEL)
}

/// Traces the external ray at angle `theta`.
///
/// Level `k` is the point with `P^k(z) = R e^{2πi d^k θ}`, reached from
/// level `k-1` through `steps_per_level` intermediate potentials. Each step
/// predicts by linear extrapolation, corrects by Newton, and is halved when
/// the correction is large enough to suggest a branch jump.
pub fn trace_ray(poly: &PolynomialMap, theta: Angle, levels: usize, steps_per_level: usize) -> Result<RayTrace> {
    if levels == 0 || steps_per_level == 0 {
        return Err(Error::InvalidArgument("levels and steps_per_level must be positive".into()));
    }
    let norm = normalize(poly)?;
    let q = &norm.monic;
    let d = q.degree() as f64;
    let radius = 100.0 * q.escape_bound();
    let log_r = radius.ln();

    let start = theta.unit() * radius;
    let mut points = vec![start];
    let mut previous = start;
    let mut current = start;
    let mut streak = 0;
    let mut converged = false;
    let mut diagnostic = None;
    let mut angle_k = theta;
    // Step length (in units of one level) between `previous` and `current`;
    // log-potential is linear in the level parameter, so this carries over
    // between levels.
    let mut last_dt = 1.0;

    'levels: for k in 1..=levels {
        angle_k = angle_k.times(q.degree() as u64);
        let direction = angle_k.unit();
        let base_step = 1.0 / steps_per_level as f64;
        let mut t = 0.0;
        let mut dt = base_step;
        while t < 1.0 {
            let t_next = (t + dt).min(1.0);
            // Modulus of P^k along the ray at fraction t of the way from
            // level k-1 (|P^k| = R^d) to level k (|P^k| = R).
            let target = direction * (log_r * d.powf(1.0 - t_next)).exp();
            let guess = if previous == current {
                current * ((d.powf(1.0 - t_next) - d.powf(1.0 - t)) * log_r / d.powi(k as i32)).exp()
            } else {
                current + (current - previous) * ((t_next - t) / last_dt)
            };
            let accepted = newton_preimage(q, k, target, guess)
                .filter(|z| (z - guess).norm() <= BRANCH_GUARD * (guess - current).norm().max(1e-300));
            match accepted {
                Some(z) => {
                    previous = current;
                    current = z;
                    last_dt = t_next - t;
                    t = t_next;
                    dt = (dt * 2.0).min(base_step);
                }
                None => {
                    dt *= 0.5;
                    if dt < base_step / 2f64.powi(MAX_HALVINGS as i32) {
                        diagnostic = Some(format!(
                            "level {k}: Newton failed or branch guard tripped at potential fraction {t:.6}"
                        ));
                        break 'levels;
                    }
                }
            }
        }
        let last = *points.last().unwrap();
        points.push(current);
        if (current - last).norm() < LANDING_TOLERANCE {
            streak += 1;
            if streak >= LANDING_STREAK {
                converged = true;
                break;
            }
        } else {
            streak = 0;
        }
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!("no landing within {} levels", points.len() - 1));
    }

    let points: Vec<Complex64> = points.into_iter().map(|w| norm.scale * w + norm.shift).collect();
    Ok(RayTrace {
        angle: theta,
        landing_estimate: *points.last().unwrap(),
        points,
        converged,
        diagnostic,
    })
}

/// True iff the ray lands and the landing estimate is within `tol` of `target`.
pub fn ray_lands_at(poly: &PolynomialMap, theta: Angle, target: Complex64, tol: f64) -> Result<bool> {
    let trace = trace_ray_default(poly, theta)?;
    Ok(trace.converged && (trace.landing_estimate - target).norm() < tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(p: i64, q: u64) -> Angle {
        Angle::new(p, q).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cycles_and_rotation_numbers() {
        let cyc = angle_cycle(a(1, 3), 2).unwrap();
        assert_eq!(cyc.angles, vec![a(1, 3), a(2, 3)]);
        assert_eq!(rotation_number(&cyc).unwrap(), a(1, 2));

        let cyc = angle_cycle(a(1, 7), 2).unwrap();
        assert_eq!(cyc.angles, vec![a(1, 7), a(2, 7), a(4, 7)]);
        assert_eq!(rotation_number(&cyc).unwrap(), a(1, 3));

        let cyc = angle_cycle(a(0, 1), 2).unwrap();
        assert_eq!(cyc.angles, vec![a(0, 1)]);
        assert_eq!(rotation_number(&cyc).unwrap(), a(0, 1));
    }

    #[test]
    fn preperiodic_angle_names_preperiod() {
        match angle_cycle(a(1, 6), 2) {
            Err(Error::PreperiodicAngle { preperiod, .. }) => assert_eq!(preperiod, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_rotation_cycle_rejected() {
        // Doubling on {1/5, 2/5, 3/5, 4/5} is not a rotation.
        let cyc = angle_cycle(a(1, 5), 2).unwrap();
        assert!(matches!(rotation_number(&cyc), Err(Error::NotRotationCycle(_))));
    }

    #[test]
    fn angle_parsing() {
        assert_eq!("3/6".parse::<Angle>().unwrap(), a(1, 2));
        assert_eq!("-1/3".parse::<Angle>().unwrap(), a(2, 3));
        assert!("x/3".parse::<Angle>().is_err());
    }

    #[test]
    fn radial_rays_of_z_squared() {
        let p = PolynomialMap::from_real(&[0.0, 0.0, 1.0]).unwrap();
        let tr = trace_ray_default(&p, a(1, 3)).unwrap();
        assert!(tr.converged, "{:?}", tr.diagnostic);
        assert!((tr.landing_estimate - a(1, 3).unit()).norm() < 1e-6);
        assert!(ray_lands_at(&p, a(0, 1), c(1.0, 0.0), 1e-6).unwrap());
        assert!(!ray_lands_at(&p, a(1, 3), c(1.0, 0.0), 1e-6).unwrap());
    }

    #[test]
    fn chebyshev_ray_lands_at_two() {
        let p = PolynomialMap::quadratic(c(-2.0, 0.0));
        assert!(ray_lands_at(&p, a(0, 1), c(2.0, 0.0), 1e-6).unwrap());
    }

    #[test]
    fn non_monic_normalization_round_trip() {
        // 2z² is conjugate to w² by z = w/2; the 0-ray lands at 1/2.
        let p = PolynomialMap::from_real(&[0.0, 0.0, 2.0]).unwrap();
        let tr = trace_ray_default(&p, a(0, 1)).unwrap();
        assert!(tr.converged);
        assert!((tr.landing_estimate - c(0.5, 0.0)).norm() < 1e-6);
    }
}
