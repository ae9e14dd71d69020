//! Piecewise monotone interval maps, kneading data, lifting families and
//! Thurston's pullback iteration on marked critical orbits.
//!
//! For a post-critically finite `f₀` the iteration `f_{k+1} = h_k ∘ f_k ∘ h_k⁻¹`
//! is carried entirely by the finite set of marked points (critical points and
//! their forward orbits). Each marked point keeps its lap symbol and its
//! combinatorial image, so `f_k` never has to be materialized: the new marked
//! points are `h_k(x_j) = (p_k on lap(x_j))⁻¹(x_σ(j))`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const CRITICAL_TOLERANCE: f64 = 1e-12;
pub const INTERVAL_SLACK: f64 = 1e-9;
pub const MONOTONE_GRID: f64 = 1e-4;
pub const BISECTION_STEPS: usize = 80;
pub const FIT_TOLERANCE: f64 = 1e-13;
pub const FIT_MAX_STEPS: usize = 200;
pub const FIT_MAX_HALVINGS: usize = 20;
pub const ORBIT_TOLERANCE: f64 = 1e-9;
pub const ORBIT_MAX_STEPS: usize = 1000;
pub const DEFAULT_TRUNCATION: usize = 64;

/// Images of the endpoints `0` and `1`, each in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryMap {
    pub zero_to: u8,
    pub one_to: u8,
}

impl BoundaryMap {
    pub fn new(zero_to: u8, one_to: u8) -> Result<Self> {
        if zero_to > 1 || one_to > 1 {
            return Err(Error::InvalidArgument("endpoints must map into {0, 1}".into()));
        }
        Ok(Self { zero_to, one_to })
    }

    /// The first lap increases iff `0 ↦ 0`.
    pub fn first_lap_increasing(&self) -> bool {
        self.zero_to == 0
    }

    /// Whether `n` alternating laps are compatible with this boundary map.
    pub fn compatible_with(&self, laps: usize) -> bool {
        let last_increasing = self.first_lap_increasing() == (laps % 2 == 1);
        (self.one_to == 1) == last_increasing
    }
}

#[derive(Clone)]
pub struct PiecewiseMonotoneMap {
    pub lap_count: usize,
    pub critical_points: Vec<f64>,
    pub critical_values: Vec<f64>,
    pub boundary: BoundaryMap,
    evaluator: RealFn,
    derivative: Option<RealFn>,
}

impl fmt::Debug for PiecewiseMonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseMonotoneMap")
            .field("lap_count", &self.lap_count)
            .field("critical_points", &self.critical_points)
            .field("critical_values", &self.critical_values)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// Lap `i` (0-based), the open interval between critical points.
    Lap(usize),
    /// Critical point `i` (0-based).
    Critical(usize),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Lap(i) => write!(f, "I{}", i + 1),
            Symbol::Critical(i) => write!(f, "C{}", i + 1),
        }
    }
}

impl PiecewiseMonotoneMap {
    /// Builds and validates a map from its evaluator. The critical values are
    /// read off the evaluator.
    pub fn new(
        critical_points: Vec<f64>,
        boundary: BoundaryMap,
        evaluator: RealFn,
        derivative: Option<RealFn>,
    ) -> Result<Self> {
        let critical_values = critical_points.iter().map(|&c| evaluator(c)).collect();
        let map = Self {
            lap_count: critical_points.len() + 1,
            critical_points,
            critical_values,
            boundary,
            evaluator,
            derivative,
        };
        map.validate()?;
        Ok(map)
    }

    /// Piecewise-linear map through `nodes`, which must start at `x = 0`, end
    /// at `x = 1` and have no flat segment. Nodes where the slope changes
    /// sign become critical points.
    pub fn piecewise_linear(nodes: &[(f64, f64)]) -> Result<Self> {
        if nodes.len() < 3 || nodes[0].0 != 0.0 || nodes[nodes.len() - 1].0 != 1.0 {
            return Err(Error::InvalidMap("nodes must run from x = 0 to x = 1 with an interior node".into()));
        }
        if nodes.windows(2).any(|w| !(w[0].0 < w[1].0) || w[0].1 == w[1].1) {
            return Err(Error::InvalidMap("nodes must be increasing in x with no flat segments".into()));
        }
        let mut critical = Vec::new();
        for w in nodes.windows(3) {
            let rising_in = w[1].1 > w[0].1;
            let rising_out = w[2].1 > w[1].1;
            if rising_in != rising_out {
                critical.push(w[1].0);
            }
        }
        let boundary = BoundaryMap::new(endpoint(nodes[0].1)?, endpoint(nodes[nodes.len() - 1].1)?)?;
        let pts: Arc<Vec<(f64, f64)>> = Arc::new(nodes.to_vec());
        let eval_pts = Arc::clone(&pts);
        let evaluator: RealFn = Arc::new(move |x| {
            let i = eval_pts.partition_point(|p| p.0 <= x).clamp(1, eval_pts.len() - 1);
            let (x0, y0) = eval_pts[i - 1];
            let (x1, y1) = eval_pts[i];
            if x == x0 {
                return y0;
            }
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        });
        let slope: RealFn = Arc::new(move |x| {
            let i = pts.partition_point(|p| p.0 <= x).clamp(1, pts.len() - 1);
            (pts[i].1 - pts[i - 1].1) / (pts[i].0 - pts[i - 1].0)
        });
        Self::new(critical, boundary, evaluator, Some(slope))
    }

    /// The full tent map `1 - |2x - 1|`.
    pub fn tent() -> Self {
        Self::piecewise_linear(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).expect("valid tent map")
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    fn slope(&self, x: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(x))
    }

    pub fn lap_increasing(&self, lap: usize) -> bool {
        self.boundary.first_lap_increasing() == lap.is_multiple_of(2)
    }

    /// Closed lap `[c_{i-1}, c_i]` with `c_{-1} = 0`, `c_{n-1} = 1`.
    pub fn lap_bounds(&self, lap: usize) -> (f64, f64) {
        let lo = if lap == 0 { 0.0 } else { self.critical_points[lap - 1] };
        let hi = self.critical_points.get(lap).copied().unwrap_or(1.0);
        (lo, hi)
    }

    /// Symbol of `x`, using `tol` for proximity to a critical point.
    pub fn symbol(&self, x: f64, tol: f64) -> Symbol {
        if let Some(i) = self.critical_points.iter().position(|c| (x - c).abs() <= tol) {
            return Symbol::Critical(i);
        }
        Symbol::Lap(self.critical_points.partition_point(|&c| c < x))
    }

    fn validate(&self) -> Result<()> {
        if self.lap_count < 2 {
            return Err(Error::InvalidMap("need at least two laps".into()));
        }
        let cps = &self.critical_points;
        if cps.windows(2).any(|w| !(w[0] < w[1])) || cps.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
            return Err(Error::InvalidMap("critical points must increase strictly inside (0, 1)".into()));
        }
        if !self.boundary.compatible_with(self.lap_count) {
            return Err(Error::InvalidMap("boundary map does not match the lap count".into()));
        }
        for (end, image) in [(0.0, self.boundary.zero_to), (1.0, self.boundary.one_to)] {
            if (self.eval(end) - image as f64).abs() > 1e-10 {
                return Err(Error::InvalidMap(format!("f({end}) != {image}")));
            }
        }
        if self.critical_values.iter().any(|v| !(-1e-12..=1.0 + 1e-12).contains(v)) {
            return Err(Error::InvalidMap("critical values must lie in [0, 1]".into()));
        }
        for lap in 0..self.lap_count {
            let (lo, hi) = self.lap_bounds(lap);
            let steps = ((hi - lo) / MONOTONE_GRID).ceil().max(1.0) as usize;
            let sign = if self.lap_increasing(lap) { 1.0 } else { -1.0 };
            let mut prev = self.eval(lo);
            for k in 1..=steps {
                let x = if k == steps { hi } else { lo + (hi - lo) * k as f64 / steps as f64 };
                let y = self.eval(x);
                if !(sign * (y - prev) > 0.0) {
                    return Err(Error::InvalidMap(format!("not strictly monotone on lap {} near x = {x}", lap + 1)));
                }
                prev = y;
            }
        }
        Ok(())
    }

    /// Inverse of the map on `lap` at `target`, by bisection and Newton polish.
    pub fn invert_on_lap(&self, lap: usize, target: f64) -> Result<f64> {
        let (lo, hi) = self.lap_bounds(lap);
        let (ylo, yhi) = (self.eval(lo), self.eval(hi));
        let (vmin, vmax) = (ylo.min(yhi), ylo.max(yhi));
        if target < vmin - CRITICAL_TOLERANCE || target > vmax + CRITICAL_TOLERANCE {
            return Err(Error::Combinatorial(format!(
                "target {target} outside the image [{vmin}, {vmax}] of lap {}",
                lap + 1
            )));
        }
        let target = target.clamp(vmin, vmax);
        let increasing = self.lap_increasing(lap);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..BISECTION_STEPS {
            let m = 0.5 * (a + b);
            if (self.eval(m) < target) == increasing {
                a = m;
            } else {
                b = m;
            }
        }
        let mut x = 0.5 * (a + b);
        for _ in 0..2 {
            let Some(d) = self.slope(x) else { break };
            if d == 0.0 {
                break;
            }
            let candidate = (x - (self.eval(x) - target) / d).clamp(lo, hi);
            if (self.eval(candidate) - target).abs() < (self.eval(x) - target).abs() {
                x = candidate;
            }
        }
        Ok(x)
    }
}

fn endpoint(y: f64) -> Result<u8> {
    if y == 0.0 {
        Ok(0)
    } else if y == 1.0 {
        Ok(1)
    } else {
        Err(Error::InvalidMap(format!("endpoint value {y} is not 0 or 1")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KneadingData {
    pub itineraries: Vec<Vec<Symbol>>,
}

impl fmt::Display for KneadingData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, it) in self.itineraries.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let syms: Vec<String> = it.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", syms.join(" "))?;
        }
        Ok(())
    }
}

/// `kneading_sequence` with the default critical tolerance.
pub fn kneading_sequence(f: &PiecewiseMonotoneMap, length: usize) -> Result<KneadingData> {
    kneading_sequence_with_tolerance(f, length, CRITICAL_TOLERANCE)
}

/// Itinerary of each critical value. Points within `tol` of a critical point
/// get its symbol and are pinned to it.
pub fn kneading_sequence_with_tolerance(f: &PiecewiseMonotoneMap, length: usize, tol: f64) -> Result<KneadingData> {
    if length < 1 {
        return Err(Error::InvalidArgument("kneading length must be >= 1".into()));
    }
    let mut itineraries = Vec::with_capacity(f.critical_values.len());
    for &v in &f.critical_values {
        let mut x = v;
        let mut it = Vec::with_capacity(length);
        for _ in 0..length {
            if !(-INTERVAL_SLACK..=1.0 + INTERVAL_SLACK).contains(&x) {
                return Err(Error::LeftInterval(x));
            }
            x = x.clamp(0.0, 1.0);
            let s = f.symbol(x, tol);
            if let Symbol::Critical(i) = s {
                x = f.critical_points[i];
            }
            it.push(s);
            x = f.eval(x);
        }
        itineraries.push(it);
    }
    Ok(KneadingData { itineraries })
}

/// A parameterized family of maps with prescribed critical values.
pub trait LiftingFamily: Send + Sync {
    fn name(&self) -> String;
    fn lap_count(&self) -> usize;
    fn alpha(&self) -> Option<f64> {
        None
    }
    fn member(&self, params: &[f64]) -> Result<PiecewiseMonotoneMap>;
    /// Parameters whose member has the given critical values.
    fn fit(&self, values: &[f64]) -> Result<Vec<f64>>;
}

/// `x ↦ k - k|2x - 1|^α`, parameter `[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFamily {
    pub alpha: f64,
}

pub fn alpha_family(alpha: f64) -> Result<AlphaFamily> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
    }
    Ok(AlphaFamily { alpha })
}

impl LiftingFamily for AlphaFamily {
    fn name(&self) -> String {
        "alpha".into()
    }

    fn lap_count(&self) -> usize {
        2
    }

    fn alpha(&self) -> Option<f64> {
        Some(self.alpha)
    }

    fn member(&self, params: &[f64]) -> Result<PiecewiseMonotoneMap> {
        let [k] = params else {
            return Err(Error::InvalidArgument("alpha family takes one parameter".into()));
        };
        let k = *k;
        if !(k > 0.0 && k <= 1.0) {
            return Err(Error::InvalidArgument(format!("k must lie in (0, 1], got {k}")));
        }
        let a = self.alpha;
        let eval: RealFn = Arc::new(move |x: f64| k - k * (2.0 * x - 1.0).abs().powf(a));
        let deriv: RealFn = Arc::new(move |x: f64| {
            let u = 2.0 * x - 1.0;
            -2.0 * k * a * u.abs().powf(a - 1.0) * u.signum()
        });
        PiecewiseMonotoneMap::new(vec![0.5], BoundaryMap { zero_to: 0, one_to: 0 }, eval, Some(deriv))
    }

    fn fit(&self, values: &[f64]) -> Result<Vec<f64>> {
        match values {
            [v] if *v > 0.0 && *v <= 1.0 => Ok(vec![*v]),
            _ => Err(Error::InvalidArgument(format!("alpha family needs one value in (0, 1], got {values:?}"))),
        }
    }
}

/// Degree-`n` real polynomials `μ₀ + K ∫₀ˣ Π(t - c_i) dt` with all critical
/// points in `(0, 1)`. Parameters are `[c_1, ..., c_{n-1}, K]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialFamily {
    pub degree: usize,
    pub boundary: BoundaryMap,
}

pub fn polynomial_family(degree: usize, boundary: BoundaryMap) -> Result<PolynomialFamily> {
    if degree < 2 {
        return Err(Error::InvalidArgument("degree must be >= 2".into()));
    }
    if !boundary.compatible_with(degree) {
        return Err(Error::InvalidArgument(format!(
            "boundary map {}↦{}, 1↦{} is impossible with {degree} laps",
            0, boundary.zero_to, boundary.one_to
        )));
    }
    Ok(PolynomialFamily { degree, boundary })
}

/// Ascending coefficients of `Π (t - r)`.
fn product_coeffs<'a>(roots: impl Iterator<Item = &'a f64>) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        c = next;
    }
    c
}

/// `∫₀ˣ Σ a_i t^i dt`.
fn integral_at(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (i, a)| acc * x + a / (i + 1) as f64)
        * x
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

impl PolynomialFamily {
    fn check_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.degree - 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} critical values, got {}",
                self.degree - 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("critical values must lie in [0, 1]".into()));
        }
        // Turning values alternate max/min, starting with a max when the
        // first lap increases, and stay strictly off the adjacent endpoints.
        let mut ends = vec![self.boundary.zero_to as f64];
        ends.extend_from_slice(values);
        ends.push(self.boundary.one_to as f64);
        for (lap, w) in ends.windows(2).enumerate() {
            let increasing = self.boundary.first_lap_increasing() == (lap % 2 == 0);
            if increasing != (w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "critical values {values:?} violate the alternation pattern"
                )));
            }
        }
        Ok(())
    }

    fn residual(&self, params: &[f64], values: &[f64]) -> Vec<f64> {
        let n = self.degree;
        let (cps, k) = (&params[..n - 1], params[n - 1]);
        let prod = product_coeffs(cps.iter());
        let mu0 = self.boundary.zero_to as f64;
        let mut r: Vec<f64> = cps
            .iter()
            .zip(values)
            .map(|(&c, &v)| mu0 + k * integral_at(&prod, c) - v)
            .collect();
        r.push(mu0 + k * integral_at(&prod, 1.0) - self.boundary.one_to as f64);
        r
    }

    fn jacobian(&self, params: &[f64]) -> DMatrix<f64> {
        let n = self.degree;
        let (cps, k) = (&params[..n - 1], params[n - 1]);
        let prod = product_coeffs(cps.iter());
        let partial: Vec<Vec<f64>> = (0..n - 1)
            .map(|j| product_coeffs(cps.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, c)| c)))
            .collect();
        let mut jac = DMatrix::zeros(n, n);
        let points: Vec<f64> = cps.iter().copied().chain(std::iter::once(1.0)).collect();
        for (row, &x) in points.iter().enumerate() {
            for (j, pj) in partial.iter().enumerate() {
                jac[(row, j)] = -k * integral_at(pj, x);
            }
            jac[(row, n - 1)] = integral_at(&prod, x);
        }
        jac
    }

    fn ordered(&self, params: &[f64]) -> bool {
        let cps = &params[..self.degree - 1];
        cps.iter().all(|&c| c > 0.0 && c < 1.0) && cps.windows(2).all(|w| w[0] < w[1])
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl LiftingFamily for PolynomialFamily {
    fn name(&self) -> String {
        format!("polynomial-{}", self.degree)
    }

    fn lap_count(&self) -> usize {
        self.degree
    }

    fn member(&self, params: &[f64]) -> Result<PiecewiseMonotoneMap> {
        let n = self.degree;
        if params.len() != n || !self.ordered(params) {
            return Err(Error::InvalidArgument(format!("bad polynomial parameters {params:?}")));
        }
        let cps = params[..n - 1].to_vec();
        let k = params[n - 1];
        let prod = product_coeffs(cps.iter());
        let mu0 = self.boundary.zero_to as f64;
        let eval_prod = prod.clone();
        let eval: RealFn = Arc::new(move |x| mu0 + k * integral_at(&eval_prod, x));
        let deriv: RealFn = Arc::new(move |x| k * horner(&prod, x));
        PiecewiseMonotoneMap::new(cps, self.boundary, eval, Some(deriv))
    }

    fn fit(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_values(values)?;
        let n = self.degree;
        let mut params: Vec<f64> = (1..n).map(|i| i as f64 / n as f64).collect();
        let prod = product_coeffs(params.iter());
        let q1 = integral_at(&prod, params[0]);
        params.push((values[0] - self.boundary.zero_to as f64) / q1);

        let mut res = self.residual(&params, values);
        let mut norm = sup_norm(&res);
        for _ in 0..FIT_MAX_STEPS {
            if norm < FIT_TOLERANCE {
                return Ok(params);
            }
            let jac = self.jacobian(&params);
            let rhs = DVector::from_vec(res.clone());
            let Some(step) = jac.lu().solve(&rhs) else {
                break;
            };
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..=FIT_MAX_HALVINGS {
                let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p - t * s).collect();
                if self.ordered(&trial) {
                    let r = self.residual(&trial, values);
                    let m = sup_norm(&r);
                    if m < norm || accepted.is_none() {
                        accepted = Some((trial, r, m));
                    }
                    if m < norm {
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((p, r, m)) = accepted else { break };
            params = p;
            res = r;
            norm = m;
        }
        if norm < FIT_TOLERANCE {
            return Ok(params);
        }
        Err(Error::FitNotConverged {
            iterations: FIT_MAX_STEPS,
            residual: norm,
        })
    }
}

/// Combinatorics of the marked critical orbits of `f₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedStructure {
    pub initial_points: Vec<f64>,
    /// Index of the image of each marked point.
    pub image: Vec<usize>,
    pub symbols: Vec<Symbol>,
    /// Marked index of each critical point.
    pub critical_index: Vec<usize>,
    /// The orbits did not close up and were cut after `truncation` points.
    pub truncated: bool,
}

impl MarkedStructure {
    /// Marks every critical point and its forward orbit. Orbits that do not
    /// close up within 1000 steps are rejected.
    pub fn post_critically_finite(f: &PiecewiseMonotoneMap) -> Result<Self> {
        Self::build(f, None)
    }

    /// Like [`MarkedStructure::post_critically_finite`], but an orbit that does
    /// not close up is cut after `truncation` points and its last point is
    /// sent to the nearest marked point. This changes the combinatorics.
    pub fn truncated(f: &PiecewiseMonotoneMap, truncation: usize) -> Result<Self> {
        Self::build(f, Some(truncation.max(2)))
    }

    fn build(f: &PiecewiseMonotoneMap, truncation: Option<usize>) -> Result<Self> {
        let mut points: Vec<f64> = Vec::new();
        let mut image: Vec<Option<usize>> = Vec::new();
        let find = |pts: &[f64], x: f64| pts.iter().position(|p| (p - x).abs() < ORBIT_TOLERANCE);
        let mut critical_index = Vec::new();
        let mut truncated = false;
        for &c in &f.critical_points {
            let start = match find(&points, c) {
                Some(i) => i,
                None => {
                    points.push(c);
                    image.push(None);
                    points.len() - 1
                }
            };
            critical_index.push(start);
            let mut current = start;
            let mut steps = 0;
            while image[current].is_none() {
                let x = f.eval(points[current]);
                if !(-INTERVAL_SLACK..=1.0 + INTERVAL_SLACK).contains(&x) {
                    return Err(Error::LeftInterval(x));
                }
                let x = x.clamp(0.0, 1.0);
                steps += 1;
                let limit = truncation.unwrap_or(ORBIT_MAX_STEPS);
                let next = match find(&points, x) {
                    Some(i) => i,
                    None if steps >= limit => {
                        if truncation.is_none() {
                            return Err(Error::Combinatorial(format!(
                                "critical orbit of {c} does not close up within {ORBIT_MAX_STEPS} steps"
                            )));
                        }
                        truncated = true;
                        nearest(&points, x)
                    }
                    None => {
                        points.push(x);
                        image.push(None);
                        points.len() - 1
                    }
                };
                image[current] = Some(next);
                current = next;
            }
        }
        let symbols = points
            .iter()
            .enumerate()
            .map(|(i, &x)| match critical_index.iter().position(|&j| j == i) {
                Some(k) => Symbol::Critical(k),
                None => f.symbol(x, CRITICAL_TOLERANCE),
            })
            .collect();
        Ok(Self {
            initial_points: points,
            image: image.into_iter().map(|i| i.expect("every marked point has an image")).collect(),
            symbols,
            critical_index,
            truncated,
        })
    }

    pub fn critical_values(&self, points: &[f64]) -> Vec<f64> {
        self.critical_index.iter().map(|&i| points[self.image[i]]).collect()
    }
}

fn nearest(points: &[f64], x: f64) -> usize {
    points
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PullbackState {
    pub iteration: usize,
    pub current_params: Vec<f64>,
    pub marked_points: Vec<f64>,
    pub history: Vec<Vec<f64>>,
}

impl PullbackState {
    pub fn initial(structure: &MarkedStructure, family: &dyn LiftingFamily) -> Result<Self> {
        let points = structure.initial_points.clone();
        let params = family.fit(&structure.critical_values(&points))?;
        Ok(Self {
            iteration: 0,
            current_params: params.clone(),
            marked_points: points,
            history: vec![params],
        })
    }
}

/// One lift: `p_k = member(fit(critical values))`, then
/// `x_j ← (p_k on lap(x_j))⁻¹(x_{image(j)})`, critical points to critical points.
pub fn pullback_step(
    state: &PullbackState,
    structure: &MarkedStructure,
    family: &dyn LiftingFamily,
) -> Result<PullbackState> {
    let p = family.member(&state.current_params)?;
    if p.lap_count != family.lap_count() {
        return Err(Error::Combinatorial("family member has the wrong lap count".into()));
    }
    let mut next = Vec::with_capacity(state.marked_points.len());
    for (j, sym) in structure.symbols.iter().enumerate() {
        let x = match *sym {
            Symbol::Critical(i) => p.critical_points[i],
            Symbol::Lap(lap) => p.invert_on_lap(lap, state.marked_points[structure.image[j]])?,
        };
        next.push(x);
    }
    let params = family.fit(&structure.critical_values(&next))?;
    let mut history = state.history.clone();
    history.push(params.clone());
    Ok(PullbackState {
        iteration: state.iteration + 1,
        current_params: params,
        marked_points: next,
        history,
    })
}

#[derive(Debug, Clone)]
pub struct ThurstonRun {
    pub limit: PiecewiseMonotoneMap,
    pub limit_params: Vec<f64>,
    /// Sup-change of the marked points at each step.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub kneading_match: bool,
    pub state: PullbackState,
    pub structure: MarkedStructure,
}

impl ThurstonRun {
    pub fn iterations(&self) -> usize {
        self.state.iteration
    }

    /// `trace[k+1] / trace[k]` over the last `count` steps.
    pub fn tail_ratios(&self, count: usize) -> Vec<f64> {
        let ratios: Vec<f64> = self.trace.windows(2).map(|w| w[1] / w[0]).collect();
        ratios[ratios.len().saturating_sub(count)..].to_vec()
    }
}

/// `thurston_iterate`: pullback steps until the marked points move by less
/// than `tol`, then a kneading comparison between `f₀` and the limit.
pub fn thurston_iterate(
    f0: &PiecewiseMonotoneMap,
    family: &dyn LiftingFamily,
    tol: f64,
    max_iter: usize,
) -> Result<ThurstonRun> {
    let structure = MarkedStructure::post_critically_finite(f0)?;
    thurston_iterate_marked(f0, structure, family, tol, max_iter)
}

pub fn thurston_iterate_marked(
    f0: &PiecewiseMonotoneMap,
    structure: MarkedStructure,
    family: &dyn LiftingFamily,
    tol: f64,
    max_iter: usize,
) -> Result<ThurstonRun> {
    if f0.lap_count != family.lap_count() {
        return Err(Error::InvalidArgument(format!(
            "f0 has {} laps but the family has {}",
            f0.lap_count,
            family.lap_count()
        )));
    }
    let mut state = PullbackState::initial(&structure, family)?;
    let mut trace = Vec::new();
    let mut converged = false;
    while state.iteration < max_iter {
        let next = pullback_step(&state, &structure, family)?;
        let change = next
            .marked_points
            .iter()
            .zip(&state.marked_points)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        trace.push(change);
        state = next;
        if change < tol {
            converged = true;
            break;
        }
    }
    let limit = family.member(&state.current_params)?;
    let length = 2 * structure.initial_points.len() + 2;
    let reference = kneading_sequence(f0, length)?;
    // The limit's critical orbit only returns to within the convergence
    // tolerance, so proximity to a critical point is judged at that scale.
    let limit_tol = CRITICAL_TOLERANCE.max(1e3 * tol);
    let kneading_match = kneading_sequence_with_tolerance(&limit, length, limit_tol)
        .map(|k| k == reference)
        .unwrap_or(false);
    Ok(ThurstonRun {
        limit_params: state.current_params.clone(),
        limit,
        trace,
        converged,
        kneading_match,
        state,
        structure,
    })
}

/// Wire format of a Thurston run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThurstonJson {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
    pub limit_params: Vec<f64>,
    pub kneading_match: bool,
}

impl ThurstonJson {
    pub fn new(run: &ThurstonRun, family: &dyn LiftingFamily) -> Self {
        Self {
            family: family.name(),
            alpha: family.alpha(),
            iterations: run.iterations(),
            converged: run.converged,
            trace: run.trace.clone(),
            limit_params: run.limit_params.clone(),
            kneading_match: run.kneading_match,
        }
    }
}

/// Unimodal piecewise-linear map whose turning point lies on a 3-cycle:
/// `0.4 ↦ 0.95 ↦ 0.2 ↦ 0.4`.
pub fn period_three_pl_map() -> PiecewiseMonotoneMap {
    PiecewiseMonotoneMap::piecewise_linear(&[(0.0, 0.0), (0.2, 0.4), (0.4, 0.95), (0.95, 0.2), (1.0, 0.0)])
        .expect("valid piecewise-linear map")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unimodal() -> BoundaryMap {
        BoundaryMap::new(0, 0).unwrap()
    }

    #[test]
    fn tent_kneading() {
        let k = kneading_sequence(&PiecewiseMonotoneMap::tent(), 5).unwrap();
        let expected = vec![Symbol::Lap(1), Symbol::Lap(0), Symbol::Lap(0), Symbol::Lap(0), Symbol::Lap(0)];
        assert_eq!(k.itineraries, vec![expected]);
    }

    #[test]
    fn period_three_kneading() {
        let f = period_three_pl_map();
        let k = kneading_sequence(&f, 7).unwrap();
        use Symbol::*;
        assert_eq!(
            k.itineraries[0],
            vec![Lap(1), Lap(0), Critical(0), Lap(1), Lap(0), Critical(0), Lap(1)]
        );
    }

    #[test]
    fn fixed_critical_point_kneading() {
        let f = PiecewiseMonotoneMap::piecewise_linear(&[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).unwrap();
        let k = kneading_sequence(&f, 4).unwrap();
        assert_eq!(k.itineraries[0], vec![Symbol::Critical(0); 4]);
    }

    #[test]
    fn invalid_maps_rejected() {
        assert!(PiecewiseMonotoneMap::piecewise_linear(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.3)]).is_err());
        assert!(PiecewiseMonotoneMap::piecewise_linear(&[(0.0, 0.0), (0.5, 0.5), (0.7, 0.5), (1.0, 0.0)]).is_err());
        assert!(alpha_family(1.0).is_err());
        assert!(polynomial_family(2, BoundaryMap::new(0, 1).unwrap()).is_err());
    }

    #[test]
    fn alpha_family_examples() {
        let fam = alpha_family(2.0).unwrap();
        let f = fam.member(&[1.0]).unwrap();
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((f.eval(x) - 4.0 * x * (1.0 - x)).abs() < 1e-15);
        }
        let fam = alpha_family(1.5).unwrap();
        let f = fam.member(&fam.fit(&[0.8]).unwrap()).unwrap();
        assert_eq!(f.critical_values, vec![0.8]);
        let f = fam.member(&[1.0]).unwrap();
        assert_eq!((f.eval(0.0), f.eval(1.0)), (0.0, 0.0));
    }

    #[test]
    fn quadratic_fit() {
        let fam = polynomial_family(2, unimodal()).unwrap();
        for v in [1.0, 0.3, 0.77] {
            let params = fam.fit(&[v]).unwrap();
            assert!((params[0] - 0.5).abs() < 1e-12);
            let f = fam.member(&params).unwrap();
            for x in [0.1, 0.6, 0.9] {
                assert!((f.eval(x) - 4.0 * v * x * (1.0 - x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cubic_fit_round_trip() {
        let fam = polynomial_family(3, BoundaryMap::new(0, 1).unwrap()).unwrap();
        let params = fam.fit(&[0.9, 0.2]).unwrap();
        let f = fam.member(&params).unwrap();
        assert!((f.critical_values[0] - 0.9).abs() < 1e-10);
        assert!((f.critical_values[1] - 0.2).abs() < 1e-10);
        assert!(fam.fit(&[0.2, 0.9]).is_err());
    }

    #[test]
    fn family_member_is_a_fixed_point() {
        let fam = polynomial_family(2, unimodal()).unwrap();
        let run = thurston_iterate(&PiecewiseMonotoneMap::tent(), &fam, 1e-10, 50).unwrap();
        assert!(run.converged);
        assert!((run.limit_params[1] - (-8.0)).abs() < 1e-9);
        // Starting from the quadratic itself nothing moves.
        let quad = fam.member(&[0.5, -8.0]).unwrap();
        let structure = MarkedStructure::post_critically_finite(&quad).unwrap();
        let state = PullbackState::initial(&structure, &fam).unwrap();
        let next = pullback_step(&state, &structure, &fam).unwrap();
        for (a, b) in next.marked_points.iter().zip(&state.marked_points) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(next.history.len(), next.iteration + 1);
    }

    #[test]
    fn inconsistent_combinatorics_detected() {
        let fam = alpha_family(2.0).unwrap();
        let f = period_three_pl_map();
        let mut structure = MarkedStructure::post_critically_finite(&f).unwrap();
        // A left-lap point whose image lies above the member's critical value.
        let cv = structure.image[structure.critical_index[0]];
        let low = structure.symbols.iter().position(|s| *s == Symbol::Lap(0)).unwrap();
        structure.image[low] = cv;
        structure.image[cv] = cv;
        let mut state = PullbackState::initial(&structure, &fam).unwrap();
        state.marked_points[cv] = 0.99;
        state.current_params = vec![0.5];
        assert!(matches!(
            pullback_step(&state, &structure, &fam),
            Err(Error::Combinatorial(_))
        ));
    }

    #[test]
    fn inversion_round_trip() {
        let fam = alpha_family(3.0).unwrap();
        let f = fam.member(&[0.9]).unwrap();
        for y in [0.0, 0.1, 0.5, 0.89] {
            for lap in 0..2 {
                let x = f.invert_on_lap(lap, y).unwrap();
                assert!((f.eval(x) - y).abs() < 1e-11);
            }
        }
        assert!(f.invert_on_lap(0, 0.95).is_err());
    }
}
