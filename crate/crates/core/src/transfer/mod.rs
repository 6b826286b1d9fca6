//! Label transfer from the source (RGB) frame into the target (HSI) frame,
//! one affine per connected component, plus the crop+resize baseline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    connected_components, default_point_count, fit_affine, sample_contour, trace_contour,
    warp_component, AffineTransform, Component, FitConfig, GeometryError, Point,
};
use crate::imaging::resample::resize_raster;
use crate::imaging::{LabelMask, RasterImage, Rect, FILAMENT, VIDEO_TAPE};
use crate::matching::{MatchError, MatcherConfig, PointMatcher};

mod baseline;
mod sample;

pub use baseline::manual_alignment;
pub use sample::{prepare_sample, SampleError, SampleViews};

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("invalid transfer configuration: {0}")]
    InvalidConfig(String),
    #[error("mask is {mask:?} but the source image is {image:?}")]
    ShapeMismatch {
        mask: (usize, usize),
        image: (usize, usize),
    },
    #[error("matcher failed: {source}")]
    TransferFailed {
        #[source]
        source: MatchError,
        report: Box<TransferReport>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// Copy the component into the target frame with plain frame scaling.
    #[default]
    KeepResizedOriginal,
    DropComponent,
}

/// Which correspondence provider a run should build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatcherKind {
    #[default]
    Ncc,
    File,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferConfig {
    /// Control points per contour; by default 16, or 32 for contours longer
    /// than 512 points.
    pub points_per_contour: Option<usize>,
    pub min_matches: usize,
    pub fallback: Fallback,
    /// Classes that win overlaps between equally sized components, highest
    /// priority first.
    pub class_priority: Vec<u8>,
    /// Components smaller than this are moved by the match of their centroid.
    pub min_component_area: usize,
    /// Reject fits whose RMS residual exceeds this, when set.
    pub max_residual_px: Option<f64>,
    pub fit: FitConfig,
    pub matcher: MatcherKind,
    pub matcher_config: MatcherConfig,
    pub snap_radius: f64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            points_per_contour: None,
            min_matches: 4,
            fallback: Fallback::KeepResizedOriginal,
            class_priority: vec![VIDEO_TAPE, FILAMENT],
            min_component_area: 9,
            max_residual_px: None,
            fit: FitConfig::default(),
            matcher: MatcherKind::Ncc,
            matcher_config: MatcherConfig::default(),
            snap_radius: crate::matching::DEFAULT_SNAP_RADIUS,
        }
    }
}

impl TransferConfig {
    pub fn validate(&self) -> Result<(), TransferError> {
        if self.min_matches < 3 {
            return Err(TransferError::InvalidConfig(format!(
                "min_matches must be at least 3, got {}",
                self.min_matches
            )));
        }
        if self.points_per_contour.is_some_and(|n| n < 4) {
            return Err(TransferError::InvalidConfig(
                "points_per_contour must be at least 4".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentStatus {
    Accepted,
    Fallback,
    Dropped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferNote {
    /// Accepted with a translation from the centroid match.
    SmallComponent,
    InsufficientMatches,
    DegenerateFit,
    ImplausibleTransform,
    HighResidual,
    MatcherError,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub class_id: u8,
    pub instance_id: u32,
    pub area: usize,
    pub queries: usize,
    pub matches: usize,
    pub mean_confidence: Option<f64>,
    pub rms: Option<f64>,
    pub transform: Option<AffineTransform>,
    pub status: ComponentStatus,
    pub note: Option<TransferNote>,
    /// Pixels this component holds in the combined output.
    pub output_area: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub components: Vec<ComponentRecord>,
    pub accepted: usize,
    pub fallback: usize,
    pub dropped: usize,
}

impl TransferReport {
    fn from_records(components: Vec<ComponentRecord>) -> Self {
        let count = |s| components.iter().filter(|c| c.status == s).count();
        Self {
            accepted: count(ComponentStatus::Accepted),
            fallback: count(ComponentStatus::Fallback),
            dropped: count(ComponentStatus::Dropped),
            components,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TransferOutput {
    pub mask: LabelMask,
    pub report: TransferReport,
}

struct Placed {
    record: ComponentRecord,
    pixels: Vec<(usize, usize)>,
}

/// One labeled pixel set to be painted into a combined mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    pub class_id: u8,
    pub instance_id: u32,
    /// Raster-ordered pixels in the output frame.
    pub pixels: Vec<(usize, usize)>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Transfers every component of `mask` (registered to `source`) into the
/// frame of `target`.
pub fn transfer_mask(
    source: &RasterImage,
    target: &RasterImage,
    mask: &LabelMask,
    cfg: &TransferConfig,
    matcher: &dyn PointMatcher,
) -> Result<TransferOutput, TransferError> {
    cfg.validate()?;
    if mask.size() != source.size() {
        return Err(TransferError::ShapeMismatch {
            mask: mask.size(),
            image: source.size(),
        });
    }
    let src_size = source.size();
    let tgt_size = target.size();
    let to_match = AffineTransform::frame_scaling(src_size, tgt_size);
    let from_match = AffineTransform::frame_scaling(tgt_size, src_size);
    // queries are asked in a source rendering sized like the target
    let src_gray = if src_size == tgt_size {
        source.to_gray()
    } else {
        resize_raster(&source.to_gray(), Some(Rect::full(src_size.0, src_size.1)), tgt_size)
    };
    let tgt_gray = target.to_gray();

    let components = connected_components(mask);
    let results: Vec<Result<Placed, (MatchError, ComponentRecord)>> = components
        .par_iter()
        .map(|c| transfer_component(c, &src_gray, &tgt_gray, &to_match, &from_match, cfg, matcher))
        .collect();

    if results.iter().any(|r| r.is_err()) {
        let mut first_err = None;
        let records = results
            .into_iter()
            .map(|r| match r {
                Ok(p) => p.record,
                Err((e, rec)) => {
                    first_err.get_or_insert(e);
                    rec
                }
            })
            .collect();
        return Err(TransferError::TransferFailed {
            source: first_err.expect("at least one error"),
            report: Box::new(TransferReport::from_records(records)),
        });
    }
    let placed: Vec<Placed> = results.into_iter().filter_map(Result::ok).collect();
    let layers: Vec<Layer> = placed
        .iter()
        .map(|p| Layer {
            class_id: p.record.class_id,
            instance_id: p.record.instance_id,
            pixels: p.pixels.clone(),
        })
        .collect();
    let (mask, areas) = combine_layers(&layers, tgt_size, &cfg.class_priority);
    let records = placed
        .into_iter()
        .zip(areas)
        .map(|(p, a)| ComponentRecord {
            output_area: a,
            ..p.record
        })
        .collect();
    Ok(TransferOutput {
        mask,
        report: TransferReport::from_records(records),
    })
}

fn transfer_component(
    c: &Component,
    src_gray: &RasterImage,
    tgt_gray: &RasterImage,
    to_match: &AffineTransform,
    from_match: &AffineTransform,
    cfg: &TransferConfig,
    matcher: &dyn PointMatcher,
) -> Result<Placed, (MatchError, ComponentRecord)> {
    let tgt_size = tgt_gray.size();
    let mut record = ComponentRecord {
        class_id: c.class_id,
        instance_id: c.instance_id,
        area: c.area(),
        queries: 0,
        matches: 0,
        mean_confidence: None,
        rms: None,
        transform: None,
        status: ComponentStatus::Accepted,
        note: None,
        output_area: 0,
    };
    let small = c.area() < cfg.min_component_area;
    let control: Vec<Point> = if small {
        vec![c.centroid()]
    } else {
        let contour = trace_contour(c);
        let n = cfg
            .points_per_contour
            .unwrap_or_else(|| default_point_count(contour.len()));
        sample_contour(&contour, n).points
    };
    let queries: Vec<Point> = control.iter().map(|&p| to_match.apply(p)).collect();
    record.queries = queries.len();

    let matched = match matcher.match_points(src_gray, tgt_gray, &queries) {
        Ok(m) => m,
        Err(e) => {
            record.status = ComponentStatus::Dropped;
            record.note = Some(TransferNote::MatcherError);
            return Err((e, record));
        }
    };
    let pairs: Vec<(Point, Point, f64)> = matched
        .iter()
        .flatten()
        .map(|m| (from_match.apply(m.source), m.target, m.confidence))
        .collect();
    record.matches = pairs.len();
    record.mean_confidence = mean(pairs.iter().map(|p| p.2));

    let outcome: Result<AffineTransform, TransferNote> = if small {
        match pairs.first() {
            Some(&(p, q, _)) => {
                let moved = to_match.apply(p);
                Ok(AffineTransform::translation(q.x - moved.x, q.y - moved.y).compose(to_match))
            }
            None => Err(TransferNote::InsufficientMatches),
        }
    } else if pairs.len() < cfg.min_matches {
        Err(TransferNote::InsufficientMatches)
    } else {
        let pp: Vec<(Point, Point)> = pairs.iter().map(|&(p, q, _)| (p, q)).collect();
        match fit_affine(&pp, &cfg.fit) {
            Ok(fit) => {
                record.rms = Some(fit.rms);
                if cfg.max_residual_px.is_some_and(|m| fit.rms > m) {
                    Err(TransferNote::HighResidual)
                } else {
                    Ok(fit.transform)
                }
            }
            Err(GeometryError::DegenerateFit(_)) => Err(TransferNote::DegenerateFit),
            Err(GeometryError::ImplausibleTransform(_)) => Err(TransferNote::ImplausibleTransform),
        }
    };

    let transform = match outcome {
        Ok(t) => {
            if small {
                record.note = Some(TransferNote::SmallComponent);
            }
            Some(t)
        }
        Err(note) => {
            record.note = Some(note);
            match cfg.fallback {
                Fallback::KeepResizedOriginal => {
                    record.status = ComponentStatus::Fallback;
                    Some(*to_match)
                }
                Fallback::DropComponent => {
                    record.status = ComponentStatus::Dropped;
                    None
                }
            }
        }
    };
    let pixels = match &transform {
        Some(t) => match warp_component(c, t, tgt_size) {
            Ok(m) => m.pixels(),
            Err(_) => {
                record.status = ComponentStatus::Dropped;
                record.note = Some(TransferNote::ImplausibleTransform);
                Vec::new()
            }
        },
        None => Vec::new(),
    };
    record.transform = transform;
    Ok(Placed {
        record,
        pixels,
    })
}

/// Paints all layers; where they overlap the smaller one wins, then the
/// class listed first in `priority`. The result does not depend on the
/// order of `layers`. Returns the mask and the pixel count each layer kept.
pub fn combine_layers(
    layers: &[Layer],
    size: (usize, usize),
    priority: &[u8],
) -> (LabelMask, Vec<usize>) {
    let rank = |class: u8| priority.iter().position(|&c| c == class).unwrap_or(priority.len());
    // lowest key wins
    let key = |l: &Layer| {
        (
            l.pixels.len(),
            rank(l.class_id),
            l.class_id,
            l.instance_id,
            l.pixels.first().map(|&(x, y)| (y, x)),
        )
    };
    let mut order: Vec<usize> = (0..layers.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(key(&layers[i])));
    let mut owner = vec![usize::MAX; size.0 * size.1];
    let mut mask = LabelMask::new(size.0, size.1);
    for &i in &order {
        let l = &layers[i];
        for &(x, y) in &l.pixels {
            owner[y * size.0 + x] = i;
            mask.set(x, y, l.class_id, l.instance_id.max(1));
        }
    }
    let mut areas = vec![0usize; layers.len()];
    for &o in &owner {
        if o != usize::MAX {
            areas[o] += 1;
        }
    }
    (mask, areas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ValueRange;
    use crate::matching::OracleMatcher;

    fn scene(w: usize, h: usize) -> (RasterImage, LabelMask) {
        let img = RasterImage::new(
            w,
            h,
            1,
            (0..w * h).map(|i| ((i * 37) % 101) as f32 / 100.0).collect(),
            ValueRange::UnitFloat,
        )
        .unwrap();
        let mut m = LabelMask::new(w, h);
        for y in 10..30 {
            for x in 8..28 {
                m.set(x, y, 1, 1);
            }
        }
        for y in 40..44 {
            for x in 5..50 {
                m.set(x, y, VIDEO_TAPE, 2);
            }
        }
        m.set(55, 55, 3, 3);
        (img, m)
    }

    #[test]
    fn oracle_identity_reproduces_mask() {
        let (img, m) = scene(64, 64);
        let out = transfer_mask(
            &img,
            &img,
            &m,
            &TransferConfig::default(),
            &OracleMatcher::global(AffineTransform::identity()),
        )
        .unwrap();
        assert_eq!(out.mask, m);
        assert_eq!(out.report.accepted, 3);
        assert_eq!(out.report.components[2].note, Some(TransferNote::SmallComponent));
    }

    #[test]
    fn global_affine_recovered_per_component() {
        let (img, m) = scene(64, 64);
        let g = AffineTransform::new(1.02, 0.03, 2.0, -0.02, 0.98, 1.5);
        let out = transfer_mask(&img, &img, &m, &TransferConfig::default(), &OracleMatcher::global(g)).unwrap();
        for r in &out.report.components[..2] {
            assert_eq!(r.status, ComponentStatus::Accepted);
            assert!(r.transform.unwrap().distance(&g) < 1e-6);
        }
        assert!(out.mask.labels().is_subset(&m.labels()));
    }

    #[test]
    fn frame_scaling_between_sizes() {
        let (img, m) = scene(64, 64);
        let target = RasterImage::zeros(32, 32, 1, ValueRange::UnitFloat);
        let s = AffineTransform::frame_scaling((64, 64), (32, 32));
        let oracle = OracleMatcher::global(s).with_query_frame(AffineTransform::frame_scaling((32, 32), (64, 64)));
        let out = transfer_mask(&img, &target, &m, &TransferConfig::default(), &oracle).unwrap();
        assert_eq!(out.mask.size(), (32, 32));
        let r = &out.report.components[0];
        assert!(r.transform.unwrap().distance(&s) < 1e-9);
    }

    struct Sparse(usize);

    impl PointMatcher for Sparse {
        fn match_points(
            &self,
            _s: &RasterImage,
            _t: &RasterImage,
            q: &[Point],
        ) -> Result<Vec<Option<crate::matching::Correspondence>>, MatchError> {
            Ok(q.iter()
                .enumerate()
                .map(|(i, &p)| {
                    (i < self.0).then_some(crate::matching::Correspondence {
                        source: p,
                        target: p,
                        confidence: 0.9,
                    })
                })
                .collect())
        }
    }

    #[test]
    fn insufficient_matches_fallbacks() {
        let (img, m) = scene(64, 64);
        let out = transfer_mask(&img, &img, &m, &TransferConfig::default(), &Sparse(2)).unwrap();
        let r = &out.report.components[0];
        assert_eq!(r.status, ComponentStatus::Fallback);
        assert_eq!(r.note, Some(TransferNote::InsufficientMatches));
        assert_eq!(out.mask, m);

        let drop = TransferConfig {
            fallback: Fallback::DropComponent,
            ..TransferConfig::default()
        };
        let out = transfer_mask(&img, &img, &m, &drop, &Sparse(2)).unwrap();
        assert_eq!(out.report.dropped, 2);
        assert_eq!(out.report.accepted, 1);
        assert_eq!(
            out.report.accepted + out.report.fallback + out.report.dropped,
            out.report.components.len()
        );
    }

    struct Failing;

    impl PointMatcher for Failing {
        fn match_points(
            &self,
            _s: &RasterImage,
            _t: &RasterImage,
            _q: &[Point],
        ) -> Result<Vec<Option<crate::matching::Correspondence>>, MatchError> {
            Err(MatchError::MissingMatches("x.jsonl".into()))
        }
    }

    #[test]
    fn matcher_failure_is_reported() {
        let (img, m) = scene(64, 64);
        match transfer_mask(&img, &img, &m, &TransferConfig::default(), &Failing) {
            Err(TransferError::TransferFailed { report, .. }) => {
                assert_eq!(report.components.len(), 3);
                assert_eq!(report.dropped, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn smaller_component_wins_overlap() {
        let mut m = LabelMask::new(20, 20);
        for y in 2..12 {
            for x in 2..12 {
                m.set(x, y, 1, 1);
            }
        }
        for y in 5..8 {
            for x in 12..16 {
                m.set(x, y, 4, 2);
            }
        }
        let img = RasterImage::zeros(20, 20, 1, ValueRange::UnitFloat);
        // move only the tape strip left by 3, onto the square
        let mut aff = std::collections::BTreeMap::new();
        aff.insert(1, AffineTransform::identity());
        aff.insert(2, AffineTransform::translation(-3.0, 0.0));
        let oracle = OracleMatcher::per_region(&m, aff);
        let out = transfer_mask(&img, &img, &m, &TransferConfig::default(), &oracle).unwrap();
        assert_eq!(out.mask.class_at(10, 6), 4);
        assert_eq!(out.mask.class_at(8, 6), 1);
        assert_eq!(out.report.components[1].output_area, 12);
    }

    #[test]
    fn rejects_small_min_matches() {
        let cfg = TransferConfig {
            min_matches: 2,
            ..TransferConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
