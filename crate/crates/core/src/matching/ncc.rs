//! Coarse-to-fine normalized cross-correlation matcher.

use rayon::prelude::*;

use super::{check_queries, Correspondence, MatchError, MatcherConfig, PointMatcher};
use crate::geometry::Point;
use crate::imaging::RasterImage;

/// Candidates carried from the coarsest level down to full resolution.
const CANDIDATES: usize = 3;
/// Smallest usable window, in pixels.
const MIN_WINDOW_AREA: usize = 9;
/// Pyramid levels stop before either side drops below this.
const MIN_LEVEL_SIDE: usize = 8;

#[derive(Clone, Debug, Default)]
pub struct NccMatcher {
    pub config: MatcherConfig,
}

impl NccMatcher {
    pub fn new(config: MatcherConfig) -> Self {
        Self { config }
    }
}

struct Plane {
    w: usize,
    h: usize,
    data: Vec<f32>,
}

impl Plane {
    fn from_raster(img: &RasterImage) -> Self {
        let gray = if img.channels() == 1 {
            img.data().to_vec()
        } else {
            img.to_gray().into_data()
        };
        Plane {
            w: img.width(),
            h: img.height(),
            data: gray,
        }
    }

    fn downsample(&self) -> Plane {
        let (w, h) = (self.w / 2, self.h / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            let r0 = &self.data[2 * y * self.w..];
            let r1 = &self.data[(2 * y + 1) * self.w..];
            for x in 0..w {
                data.push(0.25 * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]));
            }
        }
        Plane { w, h, data }
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> f64 {
        f64::from(self.data[y * self.w + x])
    }
}

fn pyramid(base: Plane, levels: usize) -> Vec<Plane> {
    let mut out = vec![base];
    while out.len() < levels {
        let last = out.last().expect("nonempty");
        if last.w / 2 < MIN_LEVEL_SIDE || last.h / 2 < MIN_LEVEL_SIDE {
            break;
        }
        let next = last.downsample();
        out.push(next);
    }
    out
}

/// Zero-mean source window, with half-extents clipped symmetrically.
struct Template {
    rx: usize,
    ry: usize,
    values: Vec<f64>,
    norm: f64,
}

impl Template {
    fn extract(p: &Plane, qx: i64, qy: i64, radius: usize) -> Option<Template> {
        if qx < 0 || qy < 0 || qx >= p.w as i64 || qy >= p.h as i64 {
            return None;
        }
        let (qx, qy) = (qx as usize, qy as usize);
        let rx = radius.min(qx).min(p.w - 1 - qx);
        let ry = radius.min(qy).min(p.h - 1 - qy);
        if (2 * rx + 1) * (2 * ry + 1) < MIN_WINDOW_AREA {
            return None;
        }
        let mut values = Vec::with_capacity((2 * rx + 1) * (2 * ry + 1));
        for y in qy - ry..=qy + ry {
            for x in qx - rx..=qx + rx {
                values.push(p.at(x, y));
            }
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        for v in &mut values {
            *v -= mean;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-9 * (values.len() as f64).sqrt()) {
            return None;
        }
        Some(Template { rx, ry, values, norm })
    }

    /// NCC against the target window centered at `(cx, cy)`; `None` when the
    /// window leaves the frame or is flat.
    fn score(&self, t: &Plane, cx: i64, cy: i64) -> Option<f64> {
        let (rx, ry) = (self.rx as i64, self.ry as i64);
        if cx - rx < 0 || cy - ry < 0 || cx + rx >= t.w as i64 || cy + ry >= t.h as i64 {
            return None;
        }
        let n = self.values.len() as f64;
        let (mut sum, mut sq, mut cross) = (0.0, 0.0, 0.0);
        let mut k = 0;
        for y in (cy - ry) as usize..=(cy + ry) as usize {
            let row = &t.data[y * t.w..];
            for x in (cx - rx) as usize..=(cx + rx) as usize {
                let v = f64::from(row[x]);
                sum += v;
                sq += v * v;
                cross += self.values[k] * v;
                k += 1;
            }
        }
        // Σ(s−s̄)(t−t̄) = Σ(s−s̄)·t since the template is zero-mean
        let var = sq - sum * sum / n;
        if !(var > 1e-12 * n) {
            return None;
        }
        Some(cross / (self.norm * var.sqrt()))
    }
}

#[inline]
fn round(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

fn level_coord(v: f64, level: usize) -> i64 {
    let s = (1usize << level) as f64;
    round((v - (s - 1.0) / 2.0) / s)
}

impl NccMatcher {
    fn match_one(&self, src: &[Plane], tgt: &[Plane], q: Point) -> Option<Correspondence> {
        let cfg = &self.config;
        let levels = src.len().min(tgt.len());
        let (qx0, qy0) = (round(q.x), round(q.y));
        let limit = cfg.search_radius as i64;

        // coarsest level with a usable template
        let mut start = None;
        for l in (0..levels).rev() {
            let (qx, qy) = (level_coord(q.x, l), level_coord(q.y, l));
            let radius = cfg.window_radius.div_ceil(1 << l).max(1);
            if let Some(t) = Template::extract(&src[l], qx, qy, radius) {
                start = Some((l, qx, qy, t));
                break;
            }
        }
        let (l0, qx, qy, tmpl) = start?;

        let s = (cfg.search_radius.div_ceil(1 << l0)) as i64;
        let mut scored: Vec<(f64, i64, i64)> = Vec::new();
        for cy in qy - s..=qy + s {
            for cx in qx - s..=qx + s {
                if let Some(v) = tmpl.score(&tgt[l0], cx, cy) {
                    scored.push((v, cx, cy));
                }
            }
        }
        // stable: equal scores keep scan order
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut seeds: Vec<(i64, i64)> = Vec::with_capacity(CANDIDATES);
        for &(_, cx, cy) in &scored {
            if seeds.len() == CANDIDATES {
                break;
            }
            if seeds.iter().all(|&(x, y)| (x - cx).abs().max((y - cy).abs()) >= 2) {
                seeds.push((cx, cy));
            }
        }

        let mut best: Option<(f64, i64, i64)> = None;
        for seed in seeds {
            let mut pos = seed;
            let mut score = None;
            if l0 == 0 {
                score = tmpl.score(&tgt[0], pos.0, pos.1);
            }
            for l in (0..l0).rev() {
                let (qx, qy) = (level_coord(q.x, l), level_coord(q.y, l));
                let radius = cfg.window_radius.div_ceil(1 << l).max(1);
                let Some(t) = Template::extract(&src[l], qx, qy, radius) else {
                    score = None;
                    break;
                };
                let s = (cfg.search_radius.div_ceil(1 << l)) as i64;
                let mut local: Option<(f64, i64, i64)> = None;
                for cy in 2 * pos.1 - 2..=2 * pos.1 + 3 {
                    for cx in 2 * pos.0 - 2..=2 * pos.0 + 3 {
                        if (cx - qx).abs() > s || (cy - qy).abs() > s {
                            continue;
                        }
                        if let Some(v) = t.score(&tgt[l], cx, cy) {
                            if local.is_none_or(|b| v > b.0) {
                                local = Some((v, cx, cy));
                            }
                        }
                    }
                }
                match local {
                    Some((v, cx, cy)) => {
                        pos = (cx, cy);
                        score = Some(v);
                    }
                    None => {
                        score = None;
                        break;
                    }
                }
            }
            if let Some(v) = score {
                if (pos.0 - qx0).abs() <= limit
                    && (pos.1 - qy0).abs() <= limit
                    && best.is_none_or(|b| v > b.0)
                {
                    best = Some((v, pos.0, pos.1));
                }
            }
        }

        let (v, cx, cy) = best?;
        let confidence = v.clamp(0.0, 1.0);
        if confidence < cfg.min_confidence {
            return None;
        }
        Some(Correspondence {
            source: q,
            target: Point::new(q.x + (cx - qx0) as f64, q.y + (cy - qy0) as f64),
            confidence,
        })
    }
}

impl PointMatcher for NccMatcher {
    fn match_points(
        &self,
        source: &RasterImage,
        target: &RasterImage,
        queries: &[Point],
    ) -> Result<Vec<Option<Correspondence>>, MatchError> {
        self.config.validate()?;
        check_queries(queries, source.size())?;
        let levels = self.config.pyramid_levels;
        let src = pyramid(Plane::from_raster(source), levels);
        let tgt = pyramid(Plane::from_raster(target), levels);
        Ok(queries
            .par_iter()
            .map(|&q| self.match_one(&src, &tgt, q))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ValueRange;

    fn texture(w: usize, h: usize, dx: i64, dy: i64) -> RasterImage {
        let data = (0..w * h)
            .map(|i| {
                let x = (i % w) as i64 - dx;
                let y = (i / w) as i64 - dy;
                let (xf, yf) = (x as f64, y as f64);
                let v = 0.5
                    + 0.2 * (xf * 0.31).sin() * (yf * 0.17).cos()
                    + 0.15 * ((xf + 2.0 * yf) * 0.11).sin()
                    + 0.1 * ((xf * 0.05 - yf * 0.23).cos());
                v.clamp(0.0, 1.0) as f32
            })
            .collect();
        RasterImage::new(w, h, 1, data, ValueRange::UnitFloat).unwrap()
    }

    #[test]
    fn self_match() {
        let img = texture(96, 96, 0, 0);
        let m = NccMatcher::default();
        let qs = [Point::new(40.0, 40.0), Point::new(50.3, 60.0)];
        let out = m.match_points(&img, &img, &qs).unwrap();
        for (q, c) in qs.iter().zip(&out) {
            let c = c.unwrap();
            assert_eq!(c.target, *q);
            assert!(c.confidence >= 0.99);
        }
    }

    #[test]
    fn recovers_translation() {
        let src = texture(128, 128, 0, 0);
        let tgt = texture(128, 128, 5, 3);
        let out = NccMatcher::default()
            .match_points(&src, &tgt, &[Point::new(60.0, 64.0)])
            .unwrap();
        let c = out[0].unwrap();
        assert_eq!(c.target, Point::new(65.0, 67.0));
        assert!(c.confidence >= 0.99);
    }

    #[test]
    fn flat_patch_is_absent() {
        let img = RasterImage::new(64, 64, 1, vec![0.5; 64 * 64], ValueRange::UnitFloat).unwrap();
        let out = NccMatcher::default()
            .match_points(&img, &img, &[Point::new(30.0, 30.0)])
            .unwrap();
        assert!(out[0].is_none());
    }

    #[test]
    fn border_query_uses_clipped_window() {
        let img = texture(96, 96, 0, 0);
        let out = NccMatcher::default()
            .match_points(&img, &img, &[Point::new(2.0, 50.0), Point::new(93.0, 90.0)])
            .unwrap();
        assert_eq!(out[0].unwrap().target, Point::new(2.0, 50.0));
        assert_eq!(out[1].unwrap().target, Point::new(93.0, 90.0));
    }

    #[test]
    fn out_of_frame_query_rejected() {
        let img = texture(32, 32, 0, 0);
        let r = NccMatcher::default().match_points(&img, &img, &[Point::new(40.0, 1.0)]);
        assert!(matches!(r, Err(MatchError::BadQuery(_))));
    }
}
