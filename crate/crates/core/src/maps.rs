//! Polynomial and rational maps of the Riemann sphere: evaluation,
//! differentiation, critical points, orbits and post-critical sets.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::roots;

pub type Complex = Complex64;

/// Beyond this modulus rational maps are evaluated in the chart `w = 1/z`.
pub const INFINITY_CHART_RADIUS: f64 = 1e8;
pub const CYCLE_TOLERANCE: f64 = 1e-9;
pub const CYCLE_WINDOW: usize = 32;
pub const DEDUP_TOLERANCE: f64 = 1e-9;
/// Relative resultant magnitude below which numerator and denominator are
/// considered to share a root.
pub const RESULTANT_TOLERANCE: f64 = 1e-10;

const TRIM_TOLERANCE: f64 = 1e-14;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Finite(Complex),
    Infinity,
}

impl Point {
    pub fn finite(self) -> Option<Complex> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Point::Infinity)
    }

    /// Distance in the plane; `∞` is only close to itself.
    pub fn distance(self, other: Point) -> f64 {
        match (self, other) {
            (Point::Finite(a), Point::Finite(b)) => (a - b).norm(),
            (Point::Infinity, Point::Infinity) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl From<Complex> for Point {
    fn from(z: Complex) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Point::Finite(z)
        } else {
            Point::Infinity
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            Point::Infinity => f.write_str("inf"),
        }
    }
}

/// Polynomial with complex coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMap {
    coefficients: Vec<Complex>,
}

impl PolynomialMap {
    pub fn new(coefficients: Vec<Complex>) -> Result<Self> {
        match coefficients.last() {
            None => Err(Error::InvalidMap("empty coefficient list".into())),
            Some(lead) if lead.norm() == 0.0 => {
                Err(Error::InvalidMap("leading coefficient is zero".into()))
            }
            Some(_) if coefficients.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) => {
                Err(Error::InvalidMap("non-finite coefficient".into()))
            }
            Some(_) => Ok(Self { coefficients }),
        }
    }

    /// Drops leading coefficients that are negligible against the largest one.
    fn trimmed(mut coefficients: Vec<Complex>) -> Self {
        let scale = coefficients.iter().map(|a| a.norm()).fold(0.0_f64, f64::max);
        while coefficients.len() > 1
            && coefficients.last().unwrap().norm() <= TRIM_TOLERANCE * scale
        {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(Complex::new(0.0, 0.0));
        }
        Self { coefficients }
    }

    /// `z² + c`
    pub fn quadratic(c: Complex) -> Self {
        Self {
            coefficients: vec![c, Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        }
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&a| Complex::new(a, 0.0)).collect())
    }

    pub fn coefficients(&self) -> &[Complex] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading(&self) -> Complex {
        *self.coefficients.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|a| a.norm() == 0.0)
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, a| acc * z + a)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex) -> (Complex, Complex) {
        let mut p = Complex::new(0.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for a in self.coefficients.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    /// `w^deg · p(1/w)`, evaluated at `w`.
    fn eval_reversed(&self, w: Complex) -> Complex {
        self.coefficients
            .iter()
            .fold(Complex::new(0.0, 0.0), |acc, a| acc * w + a)
    }

    pub fn derivative(&self) -> PolynomialMap {
        if self.coefficients.len() == 1 {
            return Self {
                coefficients: vec![Complex::new(0.0, 0.0)],
            };
        }
        Self {
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * i as f64)
                .collect(),
        }
    }

    pub fn roots(&self) -> Result<Vec<Complex>> {
        roots::roots(&self.coefficients)
    }

    pub fn mul(&self, other: &PolynomialMap) -> PolynomialMap {
        let mut out = vec![Complex::new(0.0, 0.0); self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::trimmed(out)
    }

    pub fn sub(&self, other: &PolynomialMap) -> PolynomialMap {
        let n = self.coefficients.len().max(other.coefficients.len());
        let zero = Complex::new(0.0, 0.0);
        let out = (0..n)
            .map(|i| {
                self.coefficients.get(i).copied().unwrap_or(zero)
                    - other.coefficients.get(i).copied().unwrap_or(zero)
            })
            .collect();
        Self::trimmed(out)
    }

    pub fn scale(&self, s: Complex) -> PolynomialMap {
        Self::trimmed(self.coefficients.iter().map(|a| a * s).collect())
    }

    /// Sum of coefficient moduli; the scale used for relative tolerances.
    pub fn norm1(&self) -> f64 {
        self.coefficients.iter().map(|a| a.norm()).sum()
    }

    /// Radius outside which every orbit escapes to infinity monotonically.
    ///
    /// For `|z| ≥ 1`, `|p(z)| ≥ |z|^(d-1) (|a_d| |z| - Σ_{i<d} |a_i|)`, so any
    /// `|z| > (1 + Σ_{i<d} |a_i|) / |a_d|` is mapped strictly outward.
    pub fn escape_bound(&self) -> f64 {
        let d = self.degree();
        let lower: f64 = self.coefficients[..d].iter().map(|a| a.norm()).sum();
        ((1.0 + lower) / self.leading().norm()).max(2.0)
    }
}

/// Quotient of two polynomials without common roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    numerator: PolynomialMap,
    denominator: PolynomialMap,
}

impl RationalMap {
    pub fn new(numerator: PolynomialMap, denominator: PolynomialMap) -> Result<Self> {
        if numerator.is_zero() || denominator.is_zero() {
            return Err(Error::InvalidMap("zero numerator or denominator".into()));
        }
        let res = resultant(&numerator, &denominator);
        let scale = numerator.norm1().powi(denominator.degree() as i32)
            * denominator.norm1().powi(numerator.degree() as i32);
        if res / scale < RESULTANT_TOLERANCE {
            return Err(Error::InvalidMap(format!(
                "numerator and denominator share a root (relative resultant {:e})",
                res / scale
            )));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn numerator(&self) -> &PolynomialMap {
        &self.numerator
    }

    pub fn denominator(&self) -> &PolynomialMap {
        &self.denominator
    }

    pub fn degree(&self) -> usize {
        self.numerator.degree().max(self.denominator.degree())
    }

    pub fn eval(&self, z: Point) -> Result<Point> {
        let n = self.numerator.degree();
        let m = self.denominator.degree();
        let z = match z {
            Point::Infinity => {
                return Ok(match n.cmp(&m) {
                    std::cmp::Ordering::Greater => Point::Infinity,
                    std::cmp::Ordering::Less => Point::Finite(Complex::new(0.0, 0.0)),
                    std::cmp::Ordering::Equal => {
                        Point::Finite(self.numerator.leading() / self.denominator.leading())
                    }
                })
            }
            Point::Finite(z) => z,
        };
        if z.norm() > INFINITY_CHART_RADIUS {
            // N(1/w)/D(1/w) = w^(m-n) N*(w)/D*(w) with reversed coefficient lists.
            let w = z.inv();
            let num = self.numerator.eval_reversed(w);
            let den = self.denominator.eval_reversed(w);
            let shift = w.powi(m as i32 - n as i32);
            return Ok(Self::divide(num * shift, den));
        }
        let num = self.numerator.eval(z);
        let den = self.denominator.eval(z);
        if num.norm() == 0.0 && den.norm() == 0.0 {
            return Err(Error::Indeterminate { re: z.re, im: z.im });
        }
        Ok(Self::divide(num, den))
    }

    fn divide(num: Complex, den: Complex) -> Point {
        if den.norm() == 0.0 {
            return Point::Infinity;
        }
        Point::from(num / den)
    }

    /// Quotient rule: `(N'D - ND') / D²`.
    pub fn derivative(&self) -> RationalMap {
        let n = &self.numerator;
        let d = &self.denominator;
        let top = n.derivative().mul(d).sub(&n.mul(&d.derivative()));
        RationalMap {
            numerator: top,
            denominator: d.mul(d),
        }
    }

    /// Local degree of the map at infinity.
    fn local_degree_at_infinity(&self) -> usize {
        let n = self.numerator.degree();
        let m = self.denominator.degree();
        if n != m {
            return n.abs_diff(m);
        }
        // F - F(∞) = (N - vD)/D; the degree drop of N - vD is the local degree.
        let v = self.numerator.leading() / self.denominator.leading();
        let diff = self.numerator.sub(&self.denominator.scale(v));
        if diff.is_zero() {
            return n;
        }
        n - diff.degree()
    }
}

/// |Res(p, q)| through the Sylvester determinant.
fn resultant(p: &PolynomialMap, q: &PolynomialMap) -> f64 {
    let n = p.degree();
    let m = q.degree();
    if n + m == 0 {
        return 1.0;
    }
    let size = n + m;
    let mut sylvester = DMatrix::<Complex>::zeros(size, size);
    // Rows hold descending coefficients, shifted.
    for row in 0..m {
        for (k, a) in p.coefficients().iter().rev().enumerate() {
            sylvester[(row, row + k)] = *a;
        }
    }
    for row in 0..n {
        for (k, b) in q.coefficients().iter().rev().enumerate() {
            sylvester[(m + row, row + k)] = *b;
        }
    }
    sylvester.determinant().norm()
}

/// Either kind of map; everything downstream accepts this.
#[derive(Debug, Clone, PartialEq)]
pub enum Map {
    Polynomial(PolynomialMap),
    Rational(RationalMap),
}

impl From<PolynomialMap> for Map {
    fn from(p: PolynomialMap) -> Self {
        Map::Polynomial(p)
    }
}

impl From<RationalMap> for Map {
    fn from(r: RationalMap) -> Self {
        Map::Rational(r)
    }
}

impl Map {
    pub fn degree(&self) -> usize {
        match self {
            Map::Polynomial(p) => p.degree(),
            Map::Rational(r) => r.degree(),
        }
    }

    pub fn eval(&self, z: Point) -> Result<Point> {
        match (self, z) {
            (Map::Polynomial(_), Point::Infinity) => Ok(Point::Infinity),
            (Map::Polynomial(p), Point::Finite(z)) => Ok(Point::from(p.eval(z))),
            (Map::Rational(r), z) => r.eval(z),
        }
    }

    /// Polynomial whose roots are the finite preimages of `target`:
    /// `N(w) - target · D(w)` (just `p(w) - target` for polynomials).
    pub fn preimage_polynomial(&self, target: Complex) -> PolynomialMap {
        match self {
            Map::Polynomial(p) => {
                let mut coeffs = p.coefficients().to_vec();
                coeffs[0] -= target;
                PolynomialMap::trimmed(coeffs)
            }
            Map::Rational(r) => r.numerator.sub(&r.denominator.scale(target)),
        }
    }

    pub fn as_polynomial(&self) -> Option<&PolynomialMap> {
        match self {
            Map::Polynomial(p) => Some(p),
            Map::Rational(_) => None,
        }
    }
}

/// `eval_map`: evaluate at a point of the sphere.
pub fn eval_map(map: &Map, z: Point) -> Result<Point> {
    map.eval(z)
}

/// `derivative_map`: coefficient-exact derivative. For rational maps the
/// result is `(N'D - ND') / D²` without cancellation.
pub fn derivative_map(map: &Map) -> Map {
    match map {
        Map::Polynomial(p) => Map::Polynomial(p.derivative()),
        Map::Rational(r) => Map::Rational(r.derivative()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub label: String,
}

impl PointSet {
    pub fn finite_points(&self) -> impl Iterator<Item = Complex> + '_ {
        self.points.iter().filter_map(|p| p.finite())
    }

    pub fn contains(&self, z: Point, tol: f64) -> bool {
        self.points.iter().any(|p| p.distance(z) < tol)
    }

    fn push_unique(&mut self, z: Point, tol: f64) {
        if !self.contains(z, tol) {
            self.points.push(z);
        }
    }
}

/// `critical_points`: roots of the derivative (numerator), plus `∞` for
/// rational maps when the local degree there is at least two.
///
/// Polynomials always have a critical point at infinity; it is not listed.
pub fn critical_points(map: &Map) -> Result<PointSet> {
    if map.degree() < 2 {
        return Err(Error::InvalidMap(format!(
            "critical points need degree >= 2, got {}",
            map.degree()
        )));
    }
    let (finite_poly, infinity) = match map {
        Map::Polynomial(p) => (p.derivative(), false),
        Map::Rational(r) => {
            let d = r.derivative();
            (d.numerator, r.local_degree_at_infinity() >= 2)
        }
    };
    let roots = finite_poly.roots()?;
    let mut set = PointSet {
        points: Vec::with_capacity(roots.len() + 1),
        label: "critical points".into(),
    };
    for z in roots {
        set.points.push(Point::Finite(z));
    }
    if infinity {
        set.points.push(Point::Infinity);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// `points[0]` is the starting point. A point at infinity is stored as
    /// `inf + 0i` and is always the last entry.
    pub points: Vec<Complex>,
    pub escaped: bool,
    pub escape_index: Option<usize>,
    /// `(preperiod, period)` with `|points[m + p] - points[m]| < CYCLE_TOLERANCE`.
    pub cycle_detected: Option<(usize, usize)>,
}

/// `orbit`: iterate until `n` steps, escape (`|z| >= escape_radius` or
/// overflow) or a detected cycle.
pub fn orbit(map: &Map, z0: Complex, n: usize, escape_radius: f64) -> Result<Orbit> {
    if n < 1 {
        return Err(Error::InvalidArgument("orbit length must be >= 1".into()));
    }
    if escape_radius.is_nan() || escape_radius <= 0.0 {
        return Err(Error::InvalidArgument("escape radius must be positive".into()));
    }
    let mut points = Vec::with_capacity(n + 1);
    points.push(z0);
    let mut z = z0;
    for k in 1..=n {
        let next = match map.eval(Point::Finite(z))? {
            Point::Finite(w) => w,
            Point::Infinity => {
                points.push(Complex::new(f64::INFINITY, 0.0));
                return Ok(Orbit {
                    points,
                    escaped: true,
                    escape_index: Some(k),
                    cycle_detected: None,
                });
            }
        };
        points.push(next);
        if next.norm() >= escape_radius {
            return Ok(Orbit {
                points,
                escaped: true,
                escape_index: Some(k),
                cycle_detected: None,
            });
        }
        let window = CYCLE_WINDOW.min(k);
        if let Some(p) = (1..=window).find(|&p| (next - points[k - p]).norm() < CYCLE_TOLERANCE) {
            return Ok(Orbit {
                points,
                escaped: false,
                escape_index: None,
                cycle_detected: Some((k - p, p)),
            });
        }
        z = next;
    }
    Ok(Orbit {
        points,
        escaped: false,
        escape_index: None,
        cycle_detected: None,
    })
}

/// `postcritical_set`: the forward images `f^k(c)`, `1 <= k <= depth`, of every
/// finite critical point, deduplicated.
pub fn postcritical_set(map: &Map, depth: usize) -> Result<PointSet> {
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    let radius = match map {
        Map::Polynomial(p) => p.escape_bound(),
        Map::Rational(_) => f64::INFINITY,
    };
    let critical = critical_points(map)?;
    let mut set = PointSet {
        points: Vec::new(),
        label: "post-critical set".into(),
    };
    for c in critical.finite_points() {
        let orb = orbit(map, c, depth, radius)?;
        for &z in &orb.points[1..] {
            set.push_unique(Point::from(z), DEDUP_TOLERANCE);
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn mating_map() -> RationalMap {
        let cc = c(0.5, 3f64.sqrt() / 2.0);
        RationalMap::new(
            PolynomialMap::new(vec![cc, c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
            PolynomialMap::from_real(&[-1.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn quadratic_at_zero_is_constant_term() {
        let m = Map::from(PolynomialMap::quadratic(c(-1.0, 0.0)));
        assert_eq!(eval_map(&m, Point::Finite(c(0.0, 0.0))).unwrap(), Point::Finite(c(-1.0, 0.0)));
    }

    #[test]
    fn mating_pole_and_infinity() {
        let f = Map::from(mating_map());
        assert_eq!(f.eval(Point::Finite(c(1.0, 0.0))).unwrap(), Point::Infinity);
        assert_eq!(f.eval(Point::Infinity).unwrap(), Point::Finite(c(1.0, 0.0)));
        // Chart w = 1/z near infinity agrees with the limit.
        let far = f.eval(Point::Finite(c(1e12, 0.0))).unwrap().finite().unwrap();
        assert!((far - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn common_root_rejected() {
        let num = PolynomialMap::from_real(&[-1.0, 0.0, 1.0]).unwrap(); // z² - 1
        let den = PolynomialMap::from_real(&[-1.0, 1.0]).unwrap(); // z - 1
        assert!(matches!(RationalMap::new(num, den), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn indeterminate_point_errors() {
        // Bypass validation to exercise the 0/0 path directly.
        let r = RationalMap {
            numerator: PolynomialMap::from_real(&[-1.0, 1.0]).unwrap(),
            denominator: PolynomialMap::from_real(&[-1.0, 1.0]).unwrap(),
        };
        assert!(matches!(r.eval(Point::Finite(c(1.0, 0.0))), Err(Error::Indeterminate { .. })));
    }

    #[test]
    fn derivatives_by_power_and_quotient_rule() {
        let q = PolynomialMap::quadratic(c(0.3, 0.2));
        assert_eq!(q.derivative().coefficients(), &[c(0.0, 0.0), c(2.0, 0.0)]);

        let a = c(0.0, 2.0);
        let cubic = PolynomialMap::new(vec![c(0.0, 0.0), a, c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(cubic.derivative().coefficients(), &[a, c(0.0, 0.0), c(3.0, 0.0)]);

        let f = mating_map();
        let cc = c(0.5, 3f64.sqrt() / 2.0);
        let d = f.derivative();
        // 2z(-1 - c): leading z³ terms cancel exactly.
        assert_eq!(d.numerator().degree(), 1);
        assert!((d.numerator().coefficients()[0]).norm() < 1e-15);
        assert!((d.numerator().coefficients()[1] - 2.0 * (-1.0 - cc)).norm() < 1e-15);
    }

    #[test]
    fn critical_points_examples() {
        let q = Map::from(PolynomialMap::quadratic(c(-0.4, 0.1)));
        let cp = critical_points(&q).unwrap();
        assert_eq!(cp.points.len(), 1);
        assert!(cp.points[0].distance(Point::Finite(c(0.0, 0.0))) < 1e-15);

        let t = 1.7;
        let a = c(0.0, t);
        let cubic = Map::from(PolynomialMap::new(vec![c(0.0, 0.0), a, c(0.0, 0.0), c(1.0, 0.0)]).unwrap());
        let cp = critical_points(&cubic).unwrap();
        let w = (-a / 3.0).sqrt();
        assert!(cp.contains(Point::Finite(w), 1e-12));
        assert!(cp.contains(Point::Finite(-w), 1e-12));

        let f = Map::from(mating_map());
        let cp = critical_points(&f).unwrap();
        assert_eq!(cp.points.len(), 2);
        assert!(cp.contains(Point::Finite(c(0.0, 0.0)), 1e-12));
        assert!(cp.contains(Point::Infinity, 0.5));
    }

    #[test]
    fn infinity_not_critical_for_mobius_like_map() {
        // z²/(z²-1) is critical at infinity, (2z²+1)/(z²+z) is not.
        let inside_out = RationalMap::new(
            PolynomialMap::from_real(&[0.0, 0.0, 1.0]).unwrap(),
            PolynomialMap::from_real(&[-1.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(inside_out.local_degree_at_infinity(), 2);
        let generic = RationalMap::new(
            PolynomialMap::from_real(&[1.0, 0.0, 2.0]).unwrap(),
            PolynomialMap::from_real(&[0.0, 1.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(generic.local_degree_at_infinity(), 1);
        let cp = critical_points(&Map::from(generic)).unwrap();
        assert_eq!(cp.points.len(), 2);
        assert!(cp.points.iter().all(|p| !p.is_infinite()));
    }

    #[test]
    fn orbit_examples() {
        let sq = Map::from(PolynomialMap::from_real(&[0.0, 0.0, 1.0]).unwrap());
        let o = orbit(&sq, c(0.5, 0.0), 10, 4.0).unwrap();
        assert!(!o.escaped);
        assert!(o.points.last().unwrap().norm() < 1e-9);

        let o = orbit(&sq, c(2.0, 0.0), 10, 4.0).unwrap();
        assert!(o.escaped);
        assert_eq!(o.escape_index, Some(1));
        assert_eq!(o.points[1], c(4.0, 0.0));

        let s7 = 7f64.sqrt() / 4.0;
        let cubic = Map::from(
            PolynomialMap::new(vec![c(0.0, s7), c(-0.75, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
        );
        let o = orbit(&cubic, c(0.5, 0.0), 20, 10.0).unwrap();
        assert_eq!(o.cycle_detected, Some((0, 2)));
        assert!((o.points[1] - c(-0.25, s7)).norm() < 1e-15);
    }

    #[test]
    fn rational_orbit_reaching_pole_escapes() {
        let f = Map::from(mating_map());
        // F(∞) = 1 is a pole, so an orbit through 1 escapes at the next step.
        let o = orbit(&f, c(1.0, 0.0), 5, f64::INFINITY).unwrap();
        assert!(o.escaped);
        assert_eq!(o.escape_index, Some(1));
    }

    #[test]
    fn postcritical_examples() {
        let pc = |c0: f64| {
            postcritical_set(&Map::from(PolynomialMap::quadratic(c(c0, 0.0))), 5).unwrap()
        };
        let s = pc(0.0);
        assert_eq!(s.points.len(), 1);
        assert!(s.contains(Point::Finite(c(0.0, 0.0)), 1e-12));

        let s = pc(-1.0);
        assert_eq!(s.points.len(), 2);
        assert!(s.contains(Point::Finite(c(-1.0, 0.0)), 1e-12));
        assert!(s.contains(Point::Finite(c(0.0, 0.0)), 1e-12));

        let s = pc(-2.0);
        assert_eq!(s.points.len(), 2);
        assert!(s.contains(Point::Finite(c(-2.0, 0.0)), 1e-12));
        assert!(s.contains(Point::Finite(c(2.0, 0.0)), 1e-12));
    }

    #[test]
    fn escape_bound_is_conservative() {
        let p = PolynomialMap::quadratic(c(-2.0, 0.0));
        assert_eq!(p.escape_bound(), 3.0);
        assert_eq!(PolynomialMap::from_real(&[0.0, 0.0, 1.0]).unwrap().escape_bound(), 2.0);
    }
}
