//! Rasterization of dynamical planes: escape time, exterior distance
//! estimation, inverse iteration clouds and the Mandelbrot set.

mod image;

pub use image::{colormap_rgb, encode, encode_with_interior, write_image, write_image_with_interior, Colormap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::{self, Map, Point, PointSet, PolynomialMap};
use crate::roots;

/// Points discarded before an inverse-iteration cloud starts recording.
pub const CLOUD_BURN_IN: usize = 100;
/// Escape radius used by the distance estimator, so that the Green's
/// function is read off accurately from the last iterate.
pub const DISTANCE_ESCAPE_RADIUS: f64 = 1e6;

/// Rectangle of the plane sampled at pixel centers.
///
/// Pixel `(col, row)` sits at
/// `center + ((col - (nx-1)/2) * width/nx, ((ny-1)/2 - row) * height/ny)`,
/// so row 0 is the top and, for odd pixel counts, the middle pixel is exactly
/// the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub center: Complex64,
    pub width: f64,
    pub height: f64,
    pub pixels_x: usize,
    pub pixels_y: usize,
}

impl Viewport {
    pub fn new(center: Complex64, width: f64, height: f64, pixels_x: usize, pixels_y: usize) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidArgument("viewport extents must be positive".into()));
        }
        if pixels_x == 0 || pixels_y == 0 {
            return Err(Error::InvalidArgument("viewport needs at least one pixel".into()));
        }
        Ok(Self {
            center,
            width,
            height,
            pixels_x,
            pixels_y,
        })
    }

    /// Square viewport with square pixels.
    pub fn square(center: Complex64, side: f64, pixels: usize) -> Result<Self> {
        Self::new(center, side, side, pixels, pixels)
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        (self.width / self.pixels_x as f64, self.height / self.pixels_y as f64)
    }

    pub fn to_plane(&self, col: usize, row: usize) -> Complex64 {
        let (dx, dy) = self.pixel_size();
        let ox = col as f64 - (self.pixels_x as f64 - 1.0) / 2.0;
        let oy = (self.pixels_y as f64 - 1.0) / 2.0 - row as f64;
        Complex64::new(self.center.re + ox * dx, self.center.im + oy * dy)
    }

    /// Inverse of [`Viewport::to_plane`], in fractional pixel coordinates.
    pub fn to_pixel(&self, z: Complex64) -> (f64, f64) {
        let (dx, dy) = self.pixel_size();
        let col = (z.re - self.center.re) / dx + (self.pixels_x as f64 - 1.0) / 2.0;
        let row = (self.pixels_y as f64 - 1.0) / 2.0 - (z.im - self.center.im) / dy;
        (col, row)
    }

    /// Nearest pixel to `z`, if it falls inside the image.
    pub fn nearest_pixel(&self, z: Complex64) -> Option<(usize, usize)> {
        let (col, row) = self.to_pixel(z);
        let (col, row) = (col.round(), row.round());
        if col < 0.0 || row < 0.0 || col >= self.pixels_x as f64 || row >= self.pixels_y as f64 {
            return None;
        }
        Some((col as usize, row as usize))
    }
}

/// One scalar per pixel, row-major with the top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub viewport: Viewport,
    pub values: Vec<f64>,
    pub channel_label: String,
}

impl ImageGrid {
    pub fn from_fn<F>(viewport: Viewport, channel_label: &str, f: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        let nx = viewport.pixels_x;
        let mut values = vec![0.0; nx * viewport.pixels_y];
        values.par_chunks_mut(nx).enumerate().for_each(|(row, line)| {
            for (col, v) in line.iter_mut().enumerate() {
                let x = f(viewport.to_plane(col, row));
                *v = if x.is_finite() { x } else { 0.0 };
            }
        });
        Self {
            viewport,
            values,
            channel_label: channel_label.to_string(),
        }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.viewport.pixels_x + col]
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.viewport.pixels_x, self.viewport.pixels_y)
    }

    pub fn distinct_values(&self) -> usize {
        let mut v: Vec<u64> = self.values.iter().map(|x| x.to_bits()).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    pub max_iter: usize,
    pub escape_radius: f64,
    pub seed: u64,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            max_iter: 500,
            escape_radius: 1e3,
            seed: 0,
        }
    }
}

impl RenderParams {
    fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if !(self.escape_radius > 0.0) {
            return Err(Error::InvalidArgument("escape radius must be positive".into()));
        }
        Ok(())
    }
}

/// First iterate index `k >= 1` with `|p^k(z)| >= radius`, together with that
/// iterate's modulus. Overflow counts as escape.
pub fn escape_count(poly: &PolynomialMap, z0: Complex64, max_iter: usize, radius: f64) -> Option<(usize, f64)> {
    let mut z = z0;
    for k in 1..=max_iter {
        z = poly.eval(z);
        let r = z.norm();
        if !r.is_finite() {
            return Some((k, f64::INFINITY));
        }
        if r >= radius {
            return Some((k, r));
        }
    }
    None
}

/// Continuous escape count `k + 1 - log(log|z_k| / log R) / log d`, clamped
/// away from the non-escaping sentinel 0.
pub fn smooth_count(k: usize, modulus: f64, radius: f64, degree: usize) -> f64 {
    let base = k as f64 + 1.0;
    let v = if modulus.is_finite() && degree >= 2 {
        base - (modulus.ln() / radius.ln()).ln() / (degree as f64).ln()
    } else {
        base
    };
    v.max(f64::EPSILON)
}

fn effective_radius(poly: &PolynomialMap, requested: f64) -> f64 {
    requested.max(poly.escape_bound())
}

/// `escape_time_grid`: smoothed escape count per pixel, 0 where the orbit
/// stays bounded for `max_iter` steps.
pub fn escape_time_grid(poly: &PolynomialMap, viewport: Viewport, params: &RenderParams) -> Result<ImageGrid> {
    params.validate()?;
    let radius = effective_radius(poly, params.escape_radius);
    let degree = poly.degree();
    Ok(ImageGrid::from_fn(viewport, "escape time", |z| {
        match escape_count(poly, z, params.max_iter, radius) {
            Some((k, m)) => smooth_count(k, m, radius, degree),
            None => 0.0,
        }
    }))
}

/// Period of the attracting cycle reached by non-escaping pixels (0 when the
/// pixel escapes or no cycle is found).
pub fn interior_period_grid(poly: &PolynomialMap, viewport: Viewport, params: &RenderParams) -> Result<ImageGrid> {
    params.validate()?;
    let radius = effective_radius(poly, params.escape_radius);
    let map = Map::Polynomial(poly.clone());
    Ok(ImageGrid::from_fn(viewport, "interior period", |z0| {
        let mut z = z0;
        for _ in 0..params.max_iter {
            z = poly.eval(z);
            if !(z.norm() < radius) {
                return 0.0;
            }
        }
        match maps::orbit(&map, z, 4 * maps::CYCLE_WINDOW, radius) {
            Ok(o) => o.cycle_detected.map_or(0.0, |(_, p)| p as f64),
            Err(_) => 0.0,
        }
    }))
}

/// Koebe-style lower bound on the distance from an escaping point to the
/// Julia set: `sinh(G) / (2 e^G |∇G|)`, with `G` and `∇G` read off the
/// iterate that crossed the escape radius.
pub fn distance_estimate(poly: &PolynomialMap, z0: Complex64, max_iter: usize) -> f64 {
    let degree = poly.degree() as f64;
    let mut z = z0;
    let mut dz = Complex64::new(1.0, 0.0);
    // d^n, tracked in log form to survive long orbits.
    let mut log_scale = 0.0;
    for _ in 0..max_iter {
        let (p, dp) = poly.eval_with_derivative(z);
        dz *= dp;
        z = p;
        log_scale += degree.ln();
        let r = z.norm();
        if !r.is_finite() || !dz.norm().is_finite() {
            return 0.0;
        }
        if r >= DISTANCE_ESCAPE_RADIUS {
            let green = (r.ln().ln() - log_scale).exp();
            if green <= 0.0 || dz.norm() == 0.0 {
                return 0.0;
            }
            // G/|∇G| = |z| ln|z| / |z'|; sinh(G)/(2 e^G G) = (1 - e^{-2G}) / (4G).
            let ratio = r * r.ln() / dz.norm();
            let estimate = ratio * (-(-2.0 * green).exp_m1()) / (4.0 * green);
            // Below the resolution of the starting point the orbit escaped
            // only through rounding drift off the Julia set.
            let resolution = 4.0 * f64::EPSILON * z0.norm().max(1.0);
            return if estimate < resolution { 0.0 } else { estimate };
        }
    }
    0.0
}

/// `distance_estimate_grid`: per-pixel lower bound on the distance to the
/// Julia set for escaping pixels, 0 elsewhere.
pub fn distance_estimate_grid(poly: &PolynomialMap, viewport: Viewport, params: &RenderParams) -> Result<ImageGrid> {
    params.validate()?;
    Ok(ImageGrid::from_fn(viewport, "distance estimate", |z| {
        distance_estimate(poly, z, params.max_iter)
    }))
}

/// `mandelbrot_grid`: smoothed escape count of the critical orbit of `z² + c`.
pub fn mandelbrot_grid(viewport: Viewport, params: &RenderParams) -> Result<ImageGrid> {
    params.validate()?;
    let radius = params.escape_radius.max(2.0);
    Ok(ImageGrid::from_fn(viewport, "mandelbrot escape time", |c| {
        match mandelbrot_escape(c, params.max_iter, radius) {
            Some((k, m)) => smooth_count(k, m, radius, 2),
            None => 0.0,
        }
    }))
}

/// First `k` with `|z_k| > radius` on the critical orbit of `z² + c`.
pub fn mandelbrot_escape(c: Complex64, max_iter: usize, radius: f64) -> Option<(usize, f64)> {
    let mut z = Complex64::new(0.0, 0.0);
    for k in 1..=max_iter {
        z = z * z + c;
        let r = z.norm();
        if !(r <= radius) {
            return Some((k, r));
        }
    }
    None
}

/// Membership within `max_iter` steps: the critical orbit never exceeds 2 in
/// modulus (so `c = -2`, whose orbit sits at 2, is a member).
pub fn mandelbrot_member(c: Complex64, max_iter: usize) -> bool {
    mandelbrot_escape(c, max_iter, 2.0).is_none()
}

/// A sampled Julia set plus the number of draws that had to be skipped
/// (failed preimage solves or preimages at infinity).
#[derive(Debug, Clone, PartialEq)]
pub struct Cloud {
    pub points: PointSet,
    pub skipped: usize,
}

/// The fixed point with the largest multiplier modulus.
pub fn most_repelling_fixed_point(map: &Map) -> Result<(Complex64, f64)> {
    let fixed_poly = match map {
        Map::Polynomial(p) => p.sub(&PolynomialMap::from_real(&[0.0, 1.0])?),
        Map::Rational(r) => r
            .numerator()
            .sub(&r.denominator().mul(&PolynomialMap::from_real(&[0.0, 1.0])?)),
    };
    let derivative = maps::derivative_map(map);
    let mut best: Option<(Complex64, f64)> = None;
    for z in fixed_poly.roots()? {
        let m = match derivative.eval(Point::Finite(z))? {
            Point::Finite(w) => w.norm(),
            Point::Infinity => continue,
        };
        if best.is_none_or(|(_, b)| m > b) {
            best = Some((z, m));
        }
    }
    best.ok_or_else(|| Error::InvalidMap("map has no finite fixed point".into()))
}

fn finite_preimages(map: &Map, target: Complex64) -> Result<Vec<Complex64>> {
    let poly = map.preimage_polynomial(target);
    let c = poly.coefficients();
    if poly.degree() == 2 {
        return Ok(roots::quadratic_roots(c[2], c[1], c[0]).to_vec());
    }
    poly.roots()
}

/// `inverse_iteration_cloud`: random backward orbit starting at the most
/// repelling fixed point, choosing uniformly among the `d` preimages at each
/// step. The first [`CLOUD_BURN_IN`] points are discarded.
pub fn inverse_iteration_cloud(map: &Map, n_points: usize, params: &RenderParams) -> Result<Cloud> {
    let degree = map.degree();
    if degree < 2 {
        return Err(Error::InvalidMap("inverse iteration needs degree >= 2".into()));
    }
    if n_points < 1 {
        return Err(Error::InvalidArgument("n_points must be >= 1".into()));
    }
    let (mut z, _) = most_repelling_fixed_point(map)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut points = Vec::with_capacity(n_points);
    let mut skipped = 0;
    let mut step = 0usize;
    // Every skipped draw still consumes a step so a pathological map cannot
    // loop forever.
    let budget = 4 * (n_points + CLOUD_BURN_IN) + 1000;
    while points.len() < n_points && step < budget {
        step += 1;
        let branch = rng.random_range(0..degree);
        let next = match finite_preimages(map, z) {
            Ok(pre) => pre.get(branch).copied(),
            Err(_) => None,
        };
        match next {
            Some(w) if w.re.is_finite() && w.im.is_finite() => z = w,
            _ => {
                skipped += 1;
                continue;
            }
        }
        if step > CLOUD_BURN_IN {
            points.push(Point::Finite(z));
        }
    }
    Ok(Cloud {
        points: PointSet {
            points,
            label: "inverse iteration cloud".into(),
        },
        skipped,
    })
}

/// Histogram of points over the viewport, stored as `ln(1 + count)`.
pub fn density_grid(points: &PointSet, viewport: Viewport, channel_label: &str) -> ImageGrid {
    let mut counts = vec![0u32; viewport.pixels_x * viewport.pixels_y];
    for z in points.finite_points() {
        if let Some((col, row)) = viewport.nearest_pixel(z) {
            counts[row * viewport.pixels_x + col] += 1;
        }
    }
    ImageGrid {
        viewport,
        values: counts.iter().map(|&n| (n as f64).ln_1p()).collect(),
        channel_label: channel_label.to_string(),
    }
}
