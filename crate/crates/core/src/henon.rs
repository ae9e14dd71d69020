//! Quadratic Hénon maps `(x, y) ↦ (x² + c - δy, x)` in ℂ².

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::render::{ImageGrid, RenderParams, Viewport};
use crate::roots;

pub type Pair = (Complex64, Complex64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonMap {
    pub c: Complex64,
    pub delta: Complex64,
}

impl HenonMap {
    pub fn new(c: Complex64, delta: Complex64) -> Result<Self> {
        if delta.norm() == 0.0 {
            return Err(Error::InvalidMap("Jacobian determinant must be nonzero".into()));
        }
        Ok(Self { c, delta })
    }

    pub fn apply(&self, (x, y): Pair) -> Pair {
        (x * x + self.c - self.delta * y, x)
    }

    /// `(x, y) = (y', (y'² + c - x') / δ)`.
    pub fn inverse(&self, (x, y): Pair) -> Pair {
        (y, (y * y + self.c - x) / self.delta)
    }

    /// Row-major `[[2x, -δ], [1, 0]]`.
    pub fn jacobian(&self, (x, _): Pair) -> [[Complex64; 2]; 2] {
        let one = Complex64::new(1.0, 0.0);
        [[2.0 * x, -self.delta], [one, Complex64::new(0.0, 0.0)]]
    }

    /// Both fixed points `(x, x)` with `x² - (1 + δ)x + c = 0`.
    pub fn fixed_points(&self) -> [Pair; 2] {
        let one = Complex64::new(1.0, 0.0);
        let [a, b] = roots::quadratic_roots(one, -(one + self.delta), self.c);
        [(a, a), (b, b)]
    }

    /// Eigenvalues of the Jacobian at `p`, from its trace and determinant.
    pub fn eigenvalues_at(&self, p: Pair) -> [Complex64; 2] {
        let j = self.jacobian(p);
        let trace = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        roots::quadratic_roots(Complex64::new(1.0, 0.0), -trace, det)
    }

    /// `max(10, 2(1 + |c| + |δ|))`; outside this max-norm the orbit escapes.
    pub fn escape_radius(&self) -> f64 {
        (2.0 * (1.0 + self.c.norm() + self.delta.norm())).max(10.0)
    }
}

/// A Hénon map with its prescribed fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonConstruction {
    pub map: HenonMap,
    pub fixed_point: Pair,
    pub lambda: Complex64,
    pub mu: Complex64,
}

/// `henon_from_eigenvalues`: `δ = λμ`, fixed point `(x*, x*)` with
/// `x* = (λ + μ)/2`, and `c = x*(1 + δ) - x*²`.
pub fn henon_from_eigenvalues(lambda: Complex64, mu: Complex64) -> Result<HenonConstruction> {
    let delta = lambda * mu;
    if delta.norm() == 0.0 {
        return Err(Error::InvalidArgument("eigenvalues must be nonzero".into()));
    }
    let x = (lambda + mu) / 2.0;
    let c = x * (1.0 + delta) - x * x;
    Ok(HenonConstruction {
        map: HenonMap::new(c, delta)?,
        fixed_point: (x, x),
        lambda,
        mu,
    })
}

/// Distance between two unordered pairs of numbers.
pub fn pair_distance(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
    let direct = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let swapped = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    direct.min(swapped)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit2D {
    pub points: Vec<Pair>,
    pub escaped: bool,
    pub escape_index: Option<usize>,
}

fn max_norm((x, y): Pair) -> f64 {
    x.norm().max(y.norm())
}

/// `orbit2d`: forward orbit until `n` steps or `max(|x|, |y|) > escape_radius`
/// (overflow included).
pub fn orbit2d(map: &HenonMap, start: Pair, n: usize, escape_radius: f64) -> Result<Orbit2D> {
    if n < 1 {
        return Err(Error::InvalidArgument("orbit length must be >= 1".into()));
    }
    let mut points = vec![start];
    let mut p = start;
    for k in 1..=n {
        p = map.apply(p);
        points.push(p);
        let r = max_norm(p);
        if !(r <= escape_radius) {
            return Ok(Orbit2D {
                points,
                escaped: true,
                escape_index: Some(k),
            });
        }
    }
    Ok(Orbit2D {
        points,
        escaped: false,
        escape_index: None,
    })
}

/// Real 2-plane of ℂ² sampled by a viewport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Section {
    /// Pixel `z` is the point `(z, y)`.
    FixY { re: f64, im: f64 },
    /// Pixel `a + bi` is the point `(a + i·x_im, b + i·y_im)`.
    FixImagParts { x_im: f64, y_im: f64 },
}

impl Default for Section {
    fn default() -> Self {
        Section::FixImagParts { x_im: 0.0, y_im: 0.0 }
    }
}

impl Section {
    pub fn point(&self, z: Complex64) -> Pair {
        match *self {
            Section::FixY { re, im } => (z, Complex64::new(re, im)),
            Section::FixImagParts { x_im, y_im } => (Complex64::new(z.re, x_im), Complex64::new(z.im, y_im)),
        }
    }
}

/// `kplus_slice`: escape iteration per pixel, 0 where the orbit stays bounded
/// for `max_iter` steps.
pub fn kplus_slice(map: &HenonMap, section: Section, viewport: Viewport, params: &RenderParams) -> Result<ImageGrid> {
    if params.max_iter < 1 {
        return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
    }
    let radius = params.escape_radius.max(map.escape_radius());
    Ok(ImageGrid::from_fn(viewport, "henon escape time", |z| {
        let mut p = section.point(z);
        for k in 1..=params.max_iter {
            p = map.apply(p);
            if !(max_norm(p) <= radius) {
                return k as f64;
            }
        }
        0.0
    }))
}
