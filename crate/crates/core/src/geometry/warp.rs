use serde::{Deserialize, Serialize};

use super::affine::{AffineTransform, Point};
use super::components::Component;
use super::GeometryError;

/// Row-major boolean mask.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn from_component(c: &Component, size: (usize, usize)) -> Self {
        let mut m = Self::new(size.0, size.1);
        for &(x, y) in &c.pixels {
            if x < size.0 && y < size.1 {
                m.set(x, y, true);
            }
        }
        m
    }

    /// Foreground pixel coordinates in raster order.
    pub fn pixels(&self) -> Vec<(usize, usize)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    pub fn iou(&self, other: &BinaryMask) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.data.iter().zip(&other.data) {
            inter += usize::from(a && b);
            union += usize::from(a || b);
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// Maps a component into a `target_size` frame: a target pixel is set when
/// the nearest source pixel to its pre-image belongs to the component.
/// Pixels landing outside the target frame are dropped.
pub fn warp_component(
    c: &Component,
    t: &AffineTransform,
    target_size: (usize, usize),
) -> Result<BinaryMask, GeometryError> {
    if !t.is_finite() {
        return Err(GeometryError::ImplausibleTransform("non-finite transform".into()));
    }
    let inv = t
        .inverse()
        .ok_or_else(|| GeometryError::ImplausibleTransform("singular transform".into()))?;
    let (w, h) = target_size;
    let mut out = BinaryMask::new(w, h);
    if w == 0 || h == 0 {
        return Ok(out);
    }

    // forward image of the source pixel-area box bounds the pixels to visit
    let b = &c.bbox;
    let corners = [
        Point::new(b.min_x as f64 - 0.5, b.min_y as f64 - 0.5),
        Point::new(b.max_x as f64 + 0.5, b.min_y as f64 - 0.5),
        Point::new(b.min_x as f64 - 0.5, b.max_y as f64 + 0.5),
        Point::new(b.max_x as f64 + 0.5, b.max_y as f64 + 0.5),
    ];
    let mapped = corners.map(|p| t.apply(p));
    let lo_x = mapped.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).floor() - 1.0;
    let hi_x = mapped.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max).ceil() + 1.0;
    let lo_y = mapped.iter().map(|p| p.y).fold(f64::INFINITY, f64::min).floor() - 1.0;
    let hi_y = mapped.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max).ceil() + 1.0;
    let x0 = lo_x.max(0.0) as usize;
    let y0 = lo_y.max(0.0) as usize;
    let x1 = hi_x.min((w - 1) as f64);
    let y1 = hi_y.min((h - 1) as f64);
    if x1 < x0 as f64 || y1 < y0 as f64 {
        return Ok(out);
    }
    let (x1, y1) = (x1 as usize, y1 as usize);

    let bitmap = c.bitmap();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let s = inv.apply(Point::new(x as f64, y as f64));
            let sx = (s.x + 0.5).floor();
            let sy = (s.y + 0.5).floor();
            if bitmap.get(sx as i64, sy as i64) {
                out.set(x, y, true);
            }
        }
    }
    Ok(out)
}
