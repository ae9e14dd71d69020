//! Binary PGM (P5) and PPM (P6) output.

use std::fs;
use std::path::Path;

use super::ImageGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    Gray,
    Fire,
    Ice,
    Viridis,
}

impl Colormap {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gray" | "grey" | "grayscale" => Ok(Colormap::Gray),
            "fire" => Ok(Colormap::Fire),
            "ice" => Ok(Colormap::Ice),
            "viridis" => Ok(Colormap::Viridis),
            other => Err(Error::InvalidArgument(format!("unknown colormap '{other}'"))),
        }
    }

    fn stops(self) -> &'static [[u8; 3]] {
        match self {
            Colormap::Gray => &[[0, 0, 0], [255, 255, 255]],
            Colormap::Fire => &[[0, 0, 0], [128, 0, 0], [230, 80, 0], [255, 210, 40], [255, 255, 255]],
            Colormap::Ice => &[[0, 0, 0], [10, 30, 110], [30, 120, 200], [140, 220, 250], [255, 255, 255]],
            Colormap::Viridis => &[[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]],
        }
    }
}

/// RGB for a normalized byte. Byte 0 is always black.
pub fn colormap_rgb(map: Colormap, byte: u8) -> [u8; 3] {
    if byte == 0 {
        return [0, 0, 0];
    }
    let stops = map.stops();
    let t = (byte - 1) as f64 / 254.0 * (stops.len() - 1) as f64;
    let i = (t.floor() as usize).min(stops.len() - 2);
    let f = t - i as f64;
    let mut out = [0u8; 3];
    for k in 0..3 {
        let a = stops[i][k] as f64;
        let b = stops[i + 1][k] as f64;
        out[k] = (a + (b - a) * f).round() as u8;
    }
    out
}

/// Affine map of nonzero values onto `1..=255`; 0 stays 0.
fn normalize(grid: &ImageGrid) -> Vec<u8> {
    let nonzero = grid.values.iter().copied().filter(|v| *v != 0.0 && v.is_finite());
    let (lo, hi) = nonzero.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    grid.values
        .iter()
        .map(|&v| {
            if v == 0.0 || !v.is_finite() {
                0
            } else if hi == lo {
                255
            } else {
                (1.0 + 254.0 * (v - lo) / (hi - lo)).round() as u8
            }
        })
        .collect()
}

const INTERIOR_PALETTE: [[u8; 3]; 6] = [
    [40, 60, 140],
    [30, 110, 60],
    [120, 40, 110],
    [140, 100, 20],
    [20, 110, 120],
    [110, 40, 40],
];

/// Encodes a grid as P5 (gray colormap) or P6 (any other colormap).
pub fn encode(grid: &ImageGrid, colormap: Colormap) -> Vec<u8> {
    let (w, h) = grid.dimensions();
    let bytes = normalize(grid);
    if colormap == Colormap::Gray {
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        out.extend_from_slice(&bytes);
        return out;
    }
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    for b in bytes {
        out.extend_from_slice(&colormap_rgb(colormap, b));
    }
    out
}

/// P6 image where non-escaping pixels are tinted by the interior channel
/// (attracting period), so superattracting basins are visible.
pub fn encode_with_interior(grid: &ImageGrid, interior: &ImageGrid, colormap: Colormap) -> Result<Vec<u8>> {
    if grid.dimensions() != interior.dimensions() {
        return Err(Error::InvalidArgument("channel dimensions differ".into()));
    }
    let (w, h) = grid.dimensions();
    let bytes = normalize(grid);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    for (b, period) in bytes.iter().zip(&interior.values) {
        if *b == 0 && *period >= 1.0 {
            let idx = (*period as usize - 1) % INTERIOR_PALETTE.len();
            out.extend_from_slice(&INTERIOR_PALETTE[idx]);
        } else {
            out.extend_from_slice(&colormap_rgb(colormap, *b));
        }
    }
    Ok(out)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `write_image`: P5 for the gray colormap, P6 otherwise. Output bytes depend
/// only on the grid values, so identical inputs give identical files.
pub fn write_image(grid: &ImageGrid, colormap_name: &str, path: impl AsRef<Path>) -> Result<()> {
    let colormap = Colormap::from_name(colormap_name)?;
    write_bytes(path.as_ref(), &encode(grid, colormap))
}

pub fn write_image_with_interior(
    grid: &ImageGrid,
    interior: &ImageGrid,
    colormap_name: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let colormap = Colormap::from_name(colormap_name)?;
    write_bytes(path.as_ref(), &encode_with_interior(grid, interior, colormap)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::Viewport;
    use num_complex::Complex64;

    fn grid(values: Vec<f64>) -> ImageGrid {
        ImageGrid {
            viewport: Viewport::square(Complex64::new(0.0, 0.0), 1.0, 2).unwrap(),
            values,
            channel_label: "test".into(),
        }
    }

    #[test]
    fn zero_grid_pgm() {
        let bytes = encode(&grid(vec![0.0; 4]), Colormap::Gray);
        let mut expected = b"P5\n2 2\n255\n".to_vec();
        expected.extend_from_slice(&[0, 0, 0, 0]);
        assert_eq!(bytes, expected);
    }

    #[test]
    fn constant_grid_saturates() {
        let bytes = encode(&grid(vec![1.0; 4]), Colormap::Gray);
        assert_eq!(&bytes[bytes.len() - 4..], &[255, 255, 255, 255]);
    }

    #[test]
    fn affine_normalization_keeps_zero_reserved() {
        let bytes = encode(&grid(vec![0.0, 1.0, 2.0, 3.0]), Colormap::Gray);
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 1, 128, 255]);
    }

    #[test]
    fn ppm_header_and_length() {
        let bytes = encode(&grid(vec![0.0, 1.0, 2.0, 3.0]), Colormap::Fire);
        assert!(bytes.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(bytes.len(), b"P6\n2 2\n255\n".len() + 12);
    }

    #[test]
    fn unknown_colormap_rejected() {
        assert!(Colormap::from_name("rainbow").is_err());
    }

    #[test]
    fn io_error_names_path() {
        let err = write_image(&grid(vec![0.0; 4]), "gray", "/nonexistent-dir/x.pgm").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.pgm"));
    }
}
