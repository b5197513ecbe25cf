//! Rasterisation of planar point sets and PGM output.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Viewport {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Viewport {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let v = Self { xmin, xmax, ymin, ymax };
        if !(xmin < xmax && ymin < ymax) || ![xmin, xmax, ymin, ymax].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument(format!("empty viewport {v:?}")));
        }
        Ok(v)
    }

    /// Square viewport `[-a, a]²` around the origin.
    pub fn centered(a: f64) -> Result<Self> {
        Self::new(-a, a, -a, a)
    }

    /// Bounding box of the points' first two coordinates, padded by
    /// `margin` on each side. One-dimensional points get `y ∈ [-1, 1]`.
    pub fn bounding(points: &[Vec<f64>], margin: f64) -> Result<Self> {
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for p in points {
            let (x, y) = xy(p);
            b[0] = b[0].min(x);
            b[1] = b[1].max(x);
            b[2] = b[2].min(y);
            b[3] = b[3].max(y);
        }
        if points.is_empty() {
            return Err(Error::InvalidArgument("no points to bound".into()));
        }
        let pad = margin.max(1e-12);
        let ypad = if b[2] == b[3] { pad.max(1.0) } else { pad };
        Self::new(b[0] - pad, b[1] + pad, b[2] - ypad, b[3] + ypad)
    }
}

fn xy(p: &[f64]) -> (f64, f64) {
    (p.first().copied().unwrap_or(0.0), p.get(1).copied().unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PixelMode {
    /// Lit pixels 255, others 0.
    Binary,
    /// `255·ln(1+count)/ln(1+max)`.
    HitCount,
}

/// Hit counts on a `width × height` grid, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    counts: Vec<u32>,
}

/// Pixel index along one axis: `floor((v - lo)/(hi - lo)·n)`, with `v = hi`
/// mapped to the last pixel. Points outside `[lo, hi]` are dropped.
fn bin(v: f64, lo: f64, hi: f64, n: usize) -> Option<usize> {
    if !(v >= lo && v <= hi) {
        return None;
    }
    let t = (v - lo) / (hi - lo) * n as f64;
    Some((t.floor() as usize).min(n - 1))
}

pub fn render_image(points: &[Vec<f64>], viewport: &Viewport, width: usize, height: usize) -> Result<Raster> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let mut raster = Raster {
        width,
        height,
        counts: vec![0; width * height],
    };
    for p in points {
        let (x, y) = xy(p);
        let (Some(col), Some(row)) = (
            bin(x, viewport.xmin, viewport.xmax, width),
            bin(y, viewport.ymin, viewport.ymax, height),
        ) else {
            continue;
        };
        let row = height - 1 - row;
        raster.counts[row * width + col] = raster.counts[row * width + col].saturating_add(1);
    }
    Ok(raster)
}

impl Raster {
    pub fn count(&self, row: usize, col: usize) -> u32 {
        self.counts[row * self.width + col]
    }

    pub fn lit_count(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Lit-pixel mask, row-major.
    pub fn lit(&self) -> Vec<bool> {
        self.counts.iter().map(|&c| c > 0).collect()
    }

    /// Sums `factor × factor` blocks; a block is lit when any of its pixels is.
    pub fn downsample(&self, factor: usize) -> Result<Raster> {
        if factor == 0 || self.width % factor != 0 || self.height % factor != 0 {
            return Err(Error::InvalidArgument(format!(
                "factor {factor} does not divide {}x{}",
                self.width, self.height
            )));
        }
        let (w, h) = (self.width / factor, self.height / factor);
        let mut counts = vec![0u32; w * h];
        for row in 0..self.height {
            for col in 0..self.width {
                let c = &mut counts[(row / factor) * w + col / factor];
                *c = c.saturating_add(self.count(row, col));
            }
        }
        Ok(Raster {
            width: w,
            height: h,
            counts,
        })
    }

    pub fn rotate_180(&self) -> Raster {
        let mut counts = self.counts.clone();
        counts.reverse();
        Raster { counts, ..self.clone() }
    }

    pub fn pixels(&self, mode: PixelMode) -> Vec<u8> {
        match mode {
            PixelMode::Binary => self.counts.iter().map(|&c| if c > 0 { 255 } else { 0 }).collect(),
            PixelMode::HitCount => {
                let max = self.counts.iter().copied().max().unwrap_or(0);
                if max == 0 {
                    return vec![0; self.counts.len()];
                }
                let scale = 255.0 / (1.0 + max as f64).ln();
                self.counts
                    .iter()
                    .map(|&c| ((1.0 + c as f64).ln() * scale).round().min(255.0) as u8)
                    .collect()
            }
        }
    }

    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self, mode: PixelMode) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels(mode));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_points_light_two_pixels() {
        let v = Viewport::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let r = render_image(&[vec![-1.0, -1.0], vec![1.0, 1.0]], &v, 64, 48).unwrap();
        assert_eq!(r.lit_count(), 2);
        assert_eq!(r.count(47, 0), 1);
        assert_eq!(r.count(0, 63), 1);
        let pgm = r.to_pgm(PixelMode::Binary);
        assert!(pgm.starts_with(b"P5\n64 48\n255\n"));
        assert_eq!(pgm.len(), 13 + 64 * 48);
    }

    #[test]
    fn empty_viewport_is_rejected() {
        assert!(Viewport::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Viewport::new(0.0, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn doubling_resolution_is_consistent() {
        let v = Viewport::new(-2.0, 3.0, -1.0, 1.5).unwrap();
        let pts: Vec<Vec<f64>> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.7312;
                vec![-2.0 + 5.0 * (t.sin() * 0.5 + 0.5), -1.0 + 2.5 * (t.cos() * 0.5 + 0.5)]
            })
            .collect();
        let coarse = render_image(&pts, &v, 40, 30).unwrap();
        let fine = render_image(&pts, &v, 80, 60).unwrap();
        assert_eq!(fine.downsample(2).unwrap().lit(), coarse.lit());
    }
}
