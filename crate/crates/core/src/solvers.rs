//! Newton solvers in the quadratic parameter plane, verification of explicit
//! rational and cubic examples, limb-diameter sampling and an expansion
//! heuristic.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{self, Map, Point, PolynomialMap, RationalMap};
use crate::render::{self, RenderParams, Viewport};

pub const RESIDUAL_TOLERANCE: f64 = 1e-12;
pub const RELATION_TOLERANCE: f64 = 1e-8;
pub const MAX_NEWTON_STEPS: usize = 100;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const EXPANDING_MARGIN: f64 = 1e-3;
/// Preperiods and periods tried when a requested relation has no genuine
/// root near the seed.
pub const FALLBACK_PREPERIODS: std::ops::RangeInclusive<usize> = 1..=12;
pub const FALLBACK_PERIODS: [usize; 4] = [1, 2, 3, 6];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub parameter: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub seed_distance: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub description: String,
    pub measured_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(description: impl Into<String>, measured_error: f64, tolerance: f64) -> Self {
        Self {
            description: description.into(),
            measured_error,
            tolerance,
            pass: measured_error < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub name: String,
    pub parameter: Complex64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_error(&self) -> f64 {
        self.checks.iter().map(|c| c.measured_error).fold(0.0, f64::max)
    }
}

/// Wire format shared by every solver and verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsonReport {
    pub name: String,
    pub parameter_re: f64,
    pub parameter_im: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub checks: Vec<Check>,
}

impl JsonReport {
    pub fn from_solve(name: &str, report: &SolveReport, checks: Vec<Check>) -> Self {
        Self {
            name: name.to_string(),
            parameter_re: report.parameter.re,
            parameter_im: report.parameter.im,
            residual: report.residual,
            iterations: report.iterations,
            converged: report.converged,
            checks,
        }
    }

    pub fn from_verification(report: &VerificationReport) -> Self {
        Self {
            name: report.name.clone(),
            parameter_re: report.parameter.re,
            parameter_im: report.parameter.im,
            residual: report.max_error(),
            iterations: 0,
            converged: report.passed(),
            checks: report.checks.clone(),
        }
    }
}

/// Critical orbit `z_0 = 0, ..., z_n` of `z² + c` and `dz_k/dc`.
fn critical_orbit(c: Complex64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z = Vec::with_capacity(n + 1);
    let mut dz = Vec::with_capacity(n + 1);
    z.push(Complex64::new(0.0, 0.0));
    dz.push(Complex64::new(0.0, 0.0));
    for k in 0..n {
        z.push(z[k] * z[k] + c);
        dz.push(2.0 * z[k] * dz[k] + 1.0);
    }
    (z, dz)
}

/// `P_c^{m+p}(0) - P_c^m(0)` and its `c`-derivative; `m = 0` gives the center
/// equation `P_c^p(0) = 0`.
fn relation(c: Complex64, preperiod: usize, period: usize) -> (Complex64, Complex64) {
    let (z, dz) = critical_orbit(c, preperiod + period);
    (
        z[preperiod + period] - z[preperiod],
        dz[preperiod + period] - dz[preperiod],
    )
}

/// Smallest `(preperiod, period)` with `|z_{m+p} - z_m| < RELATION_TOLERANCE`
/// among `m <= max_preperiod` and `p` dividing `max_period`.
pub fn minimal_relation(c: Complex64, max_preperiod: usize, max_period: usize) -> Option<(usize, usize)> {
    let (z, _) = critical_orbit(c, max_preperiod + max_period);
    for m in 0..=max_preperiod {
        for p in (1..=max_period).filter(|p| max_period.is_multiple_of(*p)) {
            if (z[m + p] - z[m]).norm() < RELATION_TOLERANCE {
                return Some((m, p));
            }
        }
    }
    None
}

fn newton(preperiod: usize, period: usize, seed: Complex64) -> Result<SolveReport> {
    let mut c = seed;
    let mut iterations = 0;
    while iterations < MAX_NEWTON_STEPS {
        let (g, dg) = relation(c, preperiod, period);
        let residual = g.norm();
        if !residual.is_finite() || dg.norm() == 0.0 {
            break;
        }
        let step = g / dg;
        if residual < RESIDUAL_TOLERANCE && step.norm() <= 1e-15 * c.norm().max(1.0) {
            break;
        }
        c -= step;
        iterations += 1;
        if residual < RESIDUAL_TOLERANCE && step.norm() <= 1e-13 * c.norm().max(1.0) {
            break;
        }
    }
    // Re-evaluate independently of the loop state.
    let residual = relation(c, preperiod, period).0.norm();
    if !(residual < RESIDUAL_TOLERANCE) {
        return Err(Error::NewtonNotConverged { iterations, residual });
    }
    Ok(SolveReport {
        parameter: c,
        residual,
        iterations,
        seed_distance: (c - seed).norm(),
        converged: true,
    })
}

fn check_minimal(report: SolveReport, preperiod: usize, period: usize) -> Result<SolveReport> {
    let c = report.parameter;
    match minimal_relation(c, preperiod, period) {
        Some((m, p)) if (m, p) != (preperiod, period) => Err(Error::ReducedRelation {
            re: c.re,
            im: c.im,
            preperiod: m,
            period: p,
        }),
        _ => Ok(report),
    }
}

/// `solve_superattracting_center`: Newton on `P_c^period(0) = 0`.
pub fn solve_superattracting_center(period: usize, seed: Complex64) -> Result<SolveReport> {
    if period < 1 {
        return Err(Error::InvalidArgument("period must be >= 1".into()));
    }
    let report = newton(0, period, seed)?;
    check_minimal(report, 0, period)
}

/// `solve_misiurewicz`: Newton on `P_c^{m+p}(0) = P_c^m(0)`.
pub fn solve_misiurewicz(preperiod: usize, period: usize, seed: Complex64) -> Result<SolveReport> {
    if preperiod < 1 || period < 1 {
        return Err(Error::InvalidArgument("preperiod and period must be >= 1".into()));
    }
    let report = newton(preperiod, period, seed)?;
    check_minimal(report, preperiod, period)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationFit {
    pub preperiod: usize,
    pub period: usize,
    pub report: SolveReport,
}

/// Genuine (non-reducing) preperiodic relation whose Newton root lies closest
/// to `seed`, over preperiods `1..=12` and periods `{1, 2, 3, 6}`.
pub fn nearest_relation(seed: Complex64) -> Option<RelationFit> {
    let mut candidates = Vec::new();
    for m in FALLBACK_PREPERIODS {
        for p in FALLBACK_PERIODS {
            candidates.push((m, p));
        }
    }
    candidates
        .par_iter()
        .filter_map(|&(m, p)| {
            solve_misiurewicz(m, p, seed).ok().map(|report| RelationFit {
                preperiod: m,
                period: p,
                report,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| {
            a.report
                .seed_distance
                .total_cmp(&b.report.seed_distance)
                .then((a.preperiod, a.period).cmp(&(b.preperiod, b.period)))
        })
}

/// `c = (1 + i√3)/2`, a primitive sixth root of unity.
pub fn mating_parameter() -> Complex64 {
    Complex64::new(0.5, 3f64.sqrt() / 2.0)
}

/// `F(z) = (z² + c)/(z² - 1)` with `c = (1 + i√3)/2`.
pub fn mating_map() -> RationalMap {
    let c = mating_parameter();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    RationalMap::new(
        PolynomialMap::new(vec![c, zero, one]).expect("nonzero leading coefficient"),
        PolynomialMap::new(vec![-one, zero, one]).expect("nonzero leading coefficient"),
    )
    .expect("coprime numerator and denominator")
}

fn point_error(p: Point, expected: Point) -> f64 {
    match (p, expected) {
        (Point::Infinity, Point::Infinity) => 0.0,
        (Point::Finite(a), Point::Finite(b)) => (a - b).norm(),
        (Point::Finite(a), Point::Infinity) => 1.0 / a.norm(),
        (Point::Infinity, Point::Finite(_)) => f64::INFINITY,
    }
}

fn iterate_point(map: &Map, z: Point, n: usize) -> Result<Point> {
    (0..n).try_fold(z, |w, _| maps::eval_map(map, w))
}

/// `verify_mating`: critical points `{0, ∞}`, `F³(0) = 0`, `F(∞) = 1`,
/// `F(1) = ∞`.
pub fn verify_mating() -> Result<VerificationReport> {
    let c = mating_parameter();
    let map = Map::Rational(mating_map());
    let crit = maps::critical_points(&map)?;
    let finite: Vec<Complex64> = crit.finite_points().collect();
    let has_infinity = crit.points.iter().any(|p| p.is_infinite());
    let crit_error = if finite.len() == 1 && has_infinity {
        finite[0].norm()
    } else {
        f64::INFINITY
    };
    let zero = Point::Finite(Complex64::new(0.0, 0.0));
    let one = Point::Finite(Complex64::new(1.0, 0.0));
    let checks = vec![
        Check::new("critical points are exactly {0, inf}", crit_error, IDENTITY_TOLERANCE),
        Check::new(
            "F(0) = -c",
            point_error(maps::eval_map(&map, zero)?, Point::Finite(-c)),
            IDENTITY_TOLERANCE,
        ),
        Check::new(
            "F^3(0) = 0",
            point_error(iterate_point(&map, zero, 3)?, zero),
            IDENTITY_TOLERANCE,
        ),
        Check::new(
            "F(inf) = 1",
            point_error(maps::eval_map(&map, Point::Infinity)?, one),
            IDENTITY_TOLERANCE,
        ),
        Check::new(
            "F(1) = inf",
            point_error(maps::eval_map(&map, one)?, Point::Infinity),
            IDENTITY_TOLERANCE,
        ),
    ];
    Ok(VerificationReport {
        name: "mating".into(),
        parameter: c,
        checks,
    })
}

/// `z³ - (3/4)z + (√7/4)i`.
pub fn intertwined_basilica() -> PolynomialMap {
    PolynomialMap::new(vec![
        Complex64::new(0.0, 7f64.sqrt() / 4.0),
        Complex64::new(-0.75, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    ])
    .expect("nonzero leading coefficient")
}

/// `verify_intertwined_basilica`: critical points `±1/2`, each on a
/// superattracting 2-cycle.
pub fn verify_intertwined_basilica() -> Result<VerificationReport> {
    let p = intertwined_basilica();
    let map = Map::Polynomial(p.clone());
    let crit: Vec<Complex64> = maps::critical_points(&map)?.finite_points().collect();
    let half = Complex64::new(0.5, 0.0);
    let crit_error = if crit.len() == 2 {
        let direct = (crit[0] - half).norm().max((crit[1] + half).norm());
        let swapped = (crit[0] + half).norm().max((crit[1] - half).norm());
        direct.min(swapped)
    } else {
        f64::INFINITY
    };
    let checks = vec![
        Check::new("critical points are exactly +-1/2", crit_error, IDENTITY_TOLERANCE),
        Check::new(
            "P(1/2) = -1/4 + (sqrt7/4)i",
            (p.eval(half) - Complex64::new(-0.25, 7f64.sqrt() / 4.0)).norm(),
            IDENTITY_TOLERANCE,
        ),
        Check::new("P^2(1/2) = 1/2", (p.eval(p.eval(half)) - half).norm(), IDENTITY_TOLERANCE),
        Check::new("P^2(-1/2) = -1/2", (p.eval(p.eval(-half)) + half).norm(), IDENTITY_TOLERANCE),
    ];
    Ok(VerificationReport {
        name: "intertwine".into(),
        parameter: p.coefficients()[0],
        checks,
    })
}

/// `z³ + a z`.
pub fn cubic_slice_map(a: Complex64) -> PolynomialMap {
    let zero = Complex64::new(0.0, 0.0);
    PolynomialMap::new(vec![zero, a, zero, Complex64::new(1.0, 0.0)]).expect("nonzero leading coefficient")
}

/// Both critical orbits of `z³ + az` stay inside `1 + √(1 + |a|)` for
/// `max_iter` steps.
pub fn cubic_connected(a: Complex64, max_iter: usize) -> bool {
    let radius = 1.0 + (1.0 + a.norm()).sqrt();
    let omega = (-a / 3.0).sqrt();
    [omega, -omega].iter().all(|&c0| {
        let mut z = c0;
        for _ in 0..max_iter {
            z = z * z * z + a * z;
            if !(z.norm() <= radius) {
                return false;
            }
        }
        true
    })
}

/// `cubic_slice_scan`: connectedness proxy along `a = i t`, `steps` samples
/// from `t_min` to `t_max` inclusive.
pub fn cubic_slice_scan(t_min: f64, t_max: f64, steps: usize, max_iter: usize) -> Result<Vec<(f64, bool)>> {
    if !(t_min < t_max) || steps < 2 {
        return Err(Error::InvalidArgument("need t_min < t_max and steps >= 2".into()));
    }
    Ok((0..steps)
        .into_par_iter()
        .map(|k| {
            let t = t_min + (t_max - t_min) * k as f64 / (steps - 1) as f64;
            (t, cubic_connected(Complex64::new(0.0, t), max_iter))
        })
        .collect())
}

fn snap(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

/// `e^{2πi p/q}` with the rounding residue of exact zeros removed.
pub fn internal_multiplier(p: u64, q: u64) -> Complex64 {
    let phi = 2.0 * std::f64::consts::PI * p as f64 / q as f64;
    Complex64::new(snap(phi.cos()), snap(phi.sin()))
}

/// `limb_root`: `c = λ/2 - λ²/4` for `λ = e^{2πi p/q}`.
pub fn limb_root(p: u64, q: u64) -> Result<Complex64> {
    if !(0 < p && p < q) || crate::rays::Angle::new(p as i64, q)?.denominator() != q {
        return Err(Error::InvalidArgument(format!("{p}/{q} is not a reduced fraction in (0, 1)")));
    }
    let lambda = internal_multiplier(p, q);
    Ok(lambda / 2.0 - lambda * lambda / 4.0)
}

/// Main cardioid membership: some root `μ` of `μ² - 2μ + 4c = 0` has
/// `|μ| <= 1`.
pub fn in_main_cardioid(c: Complex64) -> bool {
    let s = (Complex64::new(1.0, 0.0) - 4.0 * c).sqrt();
    let m = (1.0 + s).norm().min((1.0 - s).norm());
    m <= 1.0 + 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimbEstimate {
    pub diameter: f64,
    pub pixel_diagonal: f64,
    pub member_pixels: usize,
    pub boundary_pixels: usize,
    pub component_center: Complex64,
    /// The diameter spans fewer than ten pixel diagonals.
    pub reduced_precision: bool,
}

/// Center of the period-`q` component on the `p/q` limb.
pub fn limb_component_center(p: u64, q: u64) -> Result<SolveReport> {
    let root = limb_root(p, q)?;
    let lambda = internal_multiplier(p, q);
    let normal = lambda * (1.0 - lambda);
    let seed = root + normal / normal.norm() * (1.2 / (q * q) as f64);
    solve_superattracting_center(q as usize, seed)
}

/// `limb_diameter`: flood fill of Mandelbrot members around `limb_root(p, q)`
/// from the period-`q` center, excluding the main cardioid.
pub fn limb_diameter(p: u64, q: u64, radius: f64, grid_n: usize, max_iter: usize) -> Result<LimbEstimate> {
    if !(radius > 0.0) || grid_n < 3 {
        return Err(Error::InvalidArgument("need radius > 0 and grid_n >= 3".into()));
    }
    let root = limb_root(p, q)?;
    let center = limb_component_center(p, q)?.parameter;
    let viewport = Viewport::square(root, 2.0 * radius, grid_n)?;
    let n = grid_n;
    let mask: Vec<bool> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let c = viewport.to_plane(idx % n, idx / n);
            (c - root).norm() <= radius && !in_main_cardioid(c) && render::mandelbrot_member(c, max_iter)
        })
        .collect();

    let (sc, sr) = viewport.nearest_pixel(center).ok_or(Error::SeedNotMember {
        re: center.re,
        im: center.im,
    })?;
    if !mask[sr * n + sc] {
        return Err(Error::SeedNotMember {
            re: center.re,
            im: center.im,
        });
    }

    let mut filled = vec![false; n * n];
    let mut queue = VecDeque::from([(sc, sr)]);
    filled[sr * n + sc] = true;
    let mut members = 0;
    while let Some((col, row)) = queue.pop_front() {
        members += 1;
        let mut visit = |c: usize, r: usize| {
            let i = r * n + c;
            if mask[i] && !filled[i] {
                filled[i] = true;
                queue.push_back((c, r));
            }
        };
        if col > 0 {
            visit(col - 1, row);
        }
        if col + 1 < n {
            visit(col + 1, row);
        }
        if row > 0 {
            visit(col, row - 1);
        }
        if row + 1 < n {
            visit(col, row + 1);
        }
    }

    let is_filled = |c: isize, r: isize| {
        c >= 0 && r >= 0 && (c as usize) < n && (r as usize) < n && filled[r as usize * n + c as usize]
    };
    let boundary: Vec<Complex64> = (0..n * n)
        .filter(|&i| filled[i])
        .filter(|&i| {
            let (c, r) = ((i % n) as isize, (i / n) as isize);
            !(is_filled(c - 1, r) && is_filled(c + 1, r) && is_filled(c, r - 1) && is_filled(c, r + 1))
        })
        .map(|i| viewport.to_plane(i % n, i / n))
        .collect();
    let diameter = boundary
        .par_iter()
        .enumerate()
        .map(|(i, a)| boundary[i + 1..].iter().map(|b| (a - b).norm()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    let (dx, dy) = viewport.pixel_size();
    let pixel_diagonal = dx.hypot(dy);
    Ok(LimbEstimate {
        diameter,
        pixel_diagonal,
        member_pixels: members,
        boundary_pixels: boundary.len(),
        component_center: center,
        reduced_precision: diameter < 10.0 * pixel_diagonal,
    })
}

pub const DEFAULT_LIMB_GRID: usize = 401;
pub const DEFAULT_LIMB_ITER: usize = 300;

/// Default disk radius `4/q` about the limb root.
pub fn default_limb_radius(q: u64) -> f64 {
    4.0 / q as f64
}

/// `expanding_heuristic`: distance between the post-critical set and a sampled
/// Julia set; flagged expanding when it exceeds 1e-3.
pub fn expanding_heuristic(map: &Map, julia_samples: usize, depth: usize, seed: u64) -> Result<(f64, bool)> {
    let post = maps::postcritical_set(map, depth)?;
    let params = RenderParams {
        seed,
        ..RenderParams::default()
    };
    let cloud = render::inverse_iteration_cloud(map, julia_samples, &params)?;
    let margin = post
        .points
        .iter()
        .flat_map(|a| cloud.points.points.iter().map(move |b| a.distance(*b)))
        .fold(f64::INFINITY, f64::min);
    Ok((margin, margin > EXPANDING_MARGIN))
}

/// Printed parameters reproduced by the solvers.
pub const RABBIT_PRINTED: Complex64 = Complex64::new(-0.122561, 0.744862);
pub const TUNED_RABBIT_PRINTED: Complex64 = Complex64::new(-0.101096, 0.956287);
pub const INTERTWINING_PRINTED_T: f64 = 2.55799;
pub const PRINTED_PRECISION: f64 = 5e-6;
