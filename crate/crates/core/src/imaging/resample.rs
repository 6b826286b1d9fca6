//! Inverse-mapped resampling shared by resize, crop and augmentation.
//!
//! Every routine takes a map from *output* pixel coordinates to *source*
//! coordinates. A source coordinate is inside the frame when it rounds to a
//! valid pixel, i.e. lies in `[-0.5, W - 0.5)`; bilinear taps that fall off
//! the frame are clamped to the nearest edge pixel.

use rayon::prelude::*;

use super::raster::{Cube, FloatCube, LabelMask, RasterImage, Rect, ValueRange};
use crate::geometry::{AffineTransform, Point};

/// What happens to output pixels whose source coordinate leaves the frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Border {
    /// Clamp to the nearest edge pixel.
    Clamp,
    /// Write zero / background.
    Zero,
}

#[derive(Clone, Copy, Debug)]
struct Taps {
    idx: [usize; 4],
    w: [f32; 4],
}

#[inline]
fn nearest_index(v: f64, len: usize) -> Option<usize> {
    let r = (v + 0.5).floor();
    if r < 0.0 || r >= len as f64 {
        None
    } else {
        Some(r as usize)
    }
}

#[inline]
fn bilinear_taps(p: Point, region: Rect, frame_width: usize, border: Border) -> Option<Taps> {
    let (w, h) = (region.width, region.height);
    if border == Border::Zero && (nearest_index(p.x, w).is_none() || nearest_index(p.y, h).is_none())
    {
        return None;
    }
    let x = p.x.clamp(0.0, (w - 1) as f64);
    let y = p.y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = (x - x0 as f64) as f32;
    let fy = (y - y0 as f64) as f32;
    let at = |xx: usize, yy: usize| (region.y + yy) * frame_width + region.x + xx;
    Some(Taps {
        idx: [at(x0, y0), at(x1, y0), at(x0, y1), at(x1, y1)],
        w: [
            (1.0 - fx) * (1.0 - fy),
            fx * (1.0 - fy),
            (1.0 - fx) * fy,
            fx * fy,
        ],
    })
}

impl Taps {
    #[inline]
    fn eval(&self, sample: impl Fn(usize) -> f32) -> f32 {
        self.w[0] * sample(self.idx[0])
            + self.w[1] * sample(self.idx[1])
            + self.w[2] * sample(self.idx[2])
            + self.w[3] * sample(self.idx[3])
    }
}

/// Output→source map for resizing `region` (given in source pixels) onto an
/// `out`-sized frame. Coordinates are relative to the region's origin.
pub fn resize_map(region: (usize, usize), out: (usize, usize)) -> AffineTransform {
    AffineTransform::frame_scaling(out, region)
}

/// Bilinear warp of a raster. `inverse` maps output pixels into `region`
/// coordinates of `img` (`None` region = full frame).
pub fn warp_raster(
    img: &RasterImage,
    inverse: &AffineTransform,
    region: Option<Rect>,
    out: (usize, usize),
    border: Border,
) -> RasterImage {
    let region = region.unwrap_or(Rect::full(img.width(), img.height()));
    let ch = img.channels();
    let src = img.data();
    let mut data = vec![0.0f32; out.0 * out.1 * ch];
    data.par_chunks_mut(out.0 * ch)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..out.0 {
                let p = inverse.apply(Point::new(x as f64, y as f64));
                if let Some(t) = bilinear_taps(p, region, img.width(), border) {
                    for c in 0..ch {
                        row[x * ch + c] = t.eval(|i| src[i * ch + c]);
                    }
                }
            }
        });
    let max = img.range().max_value();
    if img.range() == ValueRange::UnitFloat {
        data.iter_mut().for_each(|v| *v = v.clamp(0.0, max));
        RasterImage::from_parts_unchecked(out.0, out.1, ch, data, ValueRange::UnitFloat)
    } else {
        // integer ranges stay integer
        data.iter_mut().for_each(|v| *v = v.round().clamp(0.0, max));
        RasterImage::from_parts_unchecked(out.0, out.1, ch, data, img.range())
    }
}

/// Bilinear warp of a cube into a float cube, dividing samples by `divisor`.
pub fn warp_cube<C: Cube>(
    cube: &C,
    inverse: &AffineTransform,
    region: Option<Rect>,
    out: (usize, usize),
    border: Border,
    divisor: f64,
) -> FloatCube {
    let region = region.unwrap_or(Rect::full(cube.width(), cube.height()));
    let n_out = out.0 * out.1;
    let taps: Vec<Option<Taps>> = (0..n_out)
        .map(|i| {
            let p = inverse.apply(Point::new((i % out.0) as f64, (i / out.0) as f64));
            bilinear_taps(p, region, cube.width(), border)
        })
        .collect();
    let bands = cube.bands();
    let mut data = vec![0.0f32; n_out * bands];
    data.par_chunks_mut(n_out).enumerate().for_each(|(b, plane)| {
        for (o, t) in plane.iter_mut().zip(&taps) {
            if let Some(t) = t {
                *o = (f64::from(t.eval(|i| cube.value(i, b) as f32)) / divisor) as f32;
            }
        }
    });
    FloatCube::from_parts_unchecked(
        out.0,
        out.1,
        bands,
        data,
        cube.wavelengths_nm().map(<[f64]>::to_vec),
    )
}

/// Nearest-neighbor warp of a label mask; off-frame pixels become background.
pub fn warp_mask(
    mask: &LabelMask,
    inverse: &AffineTransform,
    region: Option<Rect>,
    out: (usize, usize),
    border: Border,
) -> LabelMask {
    let region = region.unwrap_or(Rect::full(mask.width(), mask.height()));
    let mut result = LabelMask::new(out.0, out.1);
    for y in 0..out.1 {
        for x in 0..out.0 {
            let p = inverse.apply(Point::new(x as f64, y as f64));
            let (sx, sy) = match border {
                Border::Zero => match (
                    nearest_index(p.x, region.width),
                    nearest_index(p.y, region.height),
                ) {
                    (Some(sx), Some(sy)) => (sx, sy),
                    _ => continue,
                },
                Border::Clamp => (
                    nearest_index(p.x.clamp(0.0, (region.width - 1) as f64), region.width)
                        .unwrap_or(0),
                    nearest_index(p.y.clamp(0.0, (region.height - 1) as f64), region.height)
                        .unwrap_or(0),
                ),
            };
            let (gx, gy) = (region.x + sx, region.y + sy);
            result.set(x, y, mask.class_at(gx, gy), mask.instance_at(gx, gy));
        }
    }
    result
}

pub fn resize_raster(img: &RasterImage, region: Option<Rect>, out: (usize, usize)) -> RasterImage {
    let r = region.unwrap_or(Rect::full(img.width(), img.height()));
    warp_raster(img, &resize_map((r.width, r.height), out), Some(r), out, Border::Clamp)
}

pub fn resize_mask(mask: &LabelMask, region: Option<Rect>, out: (usize, usize)) -> LabelMask {
    let r = region.unwrap_or(Rect::full(mask.width(), mask.height()));
    warp_mask(mask, &resize_map((r.width, r.height), out), Some(r), out, Border::Clamp)
}

pub fn resize_cube<C: Cube>(
    cube: &C,
    region: Option<Rect>,
    out: (usize, usize),
    divisor: f64,
) -> FloatCube {
    let r = region.unwrap_or(Rect::full(cube.width(), cube.height()));
    warp_cube(cube, &resize_map((r.width, r.height), out), Some(r), out, Border::Clamp, divisor)
}
