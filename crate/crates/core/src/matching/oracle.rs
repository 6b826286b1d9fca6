//! Ground-truth matcher: answers queries with known affine maps.

use std::collections::BTreeMap;

use super::{check_queries, in_frame, Correspondence, MatchError, PointMatcher};
use crate::geometry::{AffineTransform, Point};
use crate::imaging::{LabelMask, RasterImage};

#[derive(Clone, Debug)]
struct Regions {
    width: usize,
    height: usize,
    instances: Vec<u32>,
    affines: BTreeMap<u32, AffineTransform>,
}

/// Maps each query through a known transform, with confidence 1.
///
/// Queries are first taken into the transforms' domain by `query_frame`
/// (identity by default). With regions, the transform is chosen by the
/// instance id found at that location; elsewhere the global transform is
/// used, if any.
#[derive(Clone, Debug)]
pub struct OracleMatcher {
    global: Option<AffineTransform>,
    regions: Option<Regions>,
    query_frame: AffineTransform,
}

impl OracleMatcher {
    pub fn global(t: AffineTransform) -> Self {
        Self {
            global: Some(t),
            regions: None,
            query_frame: AffineTransform::identity(),
        }
    }

    /// One transform per instance id of `labels`.
    pub fn per_region(labels: &LabelMask, affines: BTreeMap<u32, AffineTransform>) -> Self {
        Self {
            global: None,
            regions: Some(Regions {
                width: labels.width(),
                height: labels.height(),
                instances: labels.instance_ids().to_vec(),
                affines,
            }),
            query_frame: AffineTransform::identity(),
        }
    }

    pub fn with_fallback(mut self, t: AffineTransform) -> Self {
        self.global = Some(t);
        self
    }

    pub fn with_query_frame(mut self, query_to_domain: AffineTransform) -> Self {
        self.query_frame = query_to_domain;
        self
    }

    fn transform_at(&self, p: Point) -> Option<&AffineTransform> {
        if let Some(r) = &self.regions {
            let (x, y) = ((p.x + 0.5).floor(), (p.y + 0.5).floor());
            if x >= 0.0 && y >= 0.0 && (x as usize) < r.width && (y as usize) < r.height {
                let id = r.instances[y as usize * r.width + x as usize];
                if let Some(t) = r.affines.get(&id) {
                    return Some(t);
                }
            }
        }
        self.global.as_ref()
    }
}

impl PointMatcher for OracleMatcher {
    fn match_points(
        &self,
        source: &RasterImage,
        target: &RasterImage,
        queries: &[Point],
    ) -> Result<Vec<Option<Correspondence>>, MatchError> {
        check_queries(queries, source.size())?;
        Ok(queries
            .iter()
            .map(|&q| {
                let p = self.query_frame.apply(q);
                let t = self.transform_at(p)?;
                let dst = t.apply(p);
                in_frame(dst, target.size()).then_some(Correspondence {
                    source: q,
                    target: dst,
                    confidence: 1.0,
                })
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ValueRange;

    #[test]
    fn global_affine_exact() {
        let t = AffineTransform::new(1.1, 0.1, 2.0, 0.0, 0.9, -1.0);
        let img = RasterImage::zeros(40, 40, 1, ValueRange::UnitFloat);
        let q = [Point::new(10.0, 12.0), Point::new(39.0, 39.0)];
        let out = OracleMatcher::global(t).match_points(&img, &img, &q).unwrap();
        assert_eq!(out[0].unwrap().target, t.apply(q[0]));
        assert_eq!(out[0].unwrap().confidence, 1.0);
        // lands past the right edge
        assert!(out[1].is_none());
    }

    #[test]
    fn per_region_lookup() {
        let mut m = LabelMask::new(10, 10);
        m.set(2, 2, 1, 7);
        m.set(6, 6, 2, 9);
        let mut aff = BTreeMap::new();
        aff.insert(7, AffineTransform::translation(1.0, 0.0));
        aff.insert(9, AffineTransform::translation(0.0, 2.0));
        let img = RasterImage::zeros(10, 10, 1, ValueRange::UnitFloat);
        let o = OracleMatcher::per_region(&m, aff);
        let out = o
            .match_points(&img, &img, &[Point::new(2.0, 2.0), Point::new(6.0, 6.0), Point::new(0.0, 0.0)])
            .unwrap();
        assert_eq!(out[0].unwrap().target, Point::new(3.0, 2.0));
        assert_eq!(out[1].unwrap().target, Point::new(6.0, 8.0));
        assert!(out[2].is_none());
    }
}
