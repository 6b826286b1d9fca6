//! Instance polygon annotations and their rasterization into label masks.
//!
//! Annotation JSON layout (version 1):
//!
//! ```json
//! {
//!   "version": 1,
//!   "image_width": 1200,
//!   "image_height": 1184,
//!   "annotations": [
//!     { "class": "film", "instance_id": 1, "polygon": [[10.0, 4.0], [52.5, 8.0], [30.0, 40.0]] }
//!   ]
//! }
//! ```
//!
//! Polygon vertices are in source-image pixel coordinates, pixel `(x, y)`
//! having its center at `(x, y)`.

use serde::{Deserialize, Serialize};

use super::raster::LabelMask;
use super::ImagingError;
use crate::geometry::{AffineTransform, Point};

/// One named class with its numeric mask ID.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub id: u8,
    pub name: String,
}

/// Ordered class list. The default is the six waste classes, numbered in
/// evaluation-table order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassTaxonomy {
    pub classes: Vec<ClassInfo>,
}

pub const FILM: u8 = 1;
pub const BASKET: u8 = 2;
pub const CARDBOARD: u8 = 3;
pub const VIDEO_TAPE: u8 = 4;
pub const FILAMENT: u8 = 5;
pub const TRASH_BAG: u8 = 6;

impl Default for ClassTaxonomy {
    fn default() -> Self {
        let names = [
            (FILM, "film"),
            (BASKET, "basket"),
            (CARDBOARD, "cardboard"),
            (VIDEO_TAPE, "video_tape"),
            (FILAMENT, "filament"),
            (TRASH_BAG, "trash_bag"),
        ];
        Self {
            classes: names
                .iter()
                .map(|&(id, name)| ClassInfo {
                    id,
                    name: name.to_string(),
                })
                .collect(),
        }
    }
}

impl ClassTaxonomy {
    pub fn id_of(&self, name: &str) -> Option<u8> {
        self.classes.iter().find(|c| c.name == name).map(|c| c.id)
    }

    pub fn name_of(&self, id: u8) -> Option<&str> {
        self.classes
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.name.as_str())
    }

    pub fn ids(&self) -> Vec<u8> {
        self.classes.iter().map(|c| c.id).collect()
    }

    pub fn validate(&self) -> Result<(), ImagingError> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.classes {
            if c.id == 0 {
                return Err(ImagingError::InvalidTaxonomy(format!(
                    "class {:?} uses the background id 0",
                    c.name
                )));
            }
            if !seen.insert(c.id) {
                return Err(ImagingError::InvalidTaxonomy(format!("duplicate id {}", c.id)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(rename = "class")]
    pub class_name: String,
    pub instance_id: u32,
    pub polygon: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    #[serde(default = "annotation_version")]
    pub version: u32,
    pub image_width: usize,
    pub image_height: usize,
    pub annotations: Vec<Annotation>,
}

fn annotation_version() -> u32 {
    1
}

impl AnnotationSet {
    pub fn new(image_width: usize, image_height: usize) -> Self {
        Self {
            version: 1,
            image_width,
            image_height,
            annotations: Vec::new(),
        }
    }

    pub fn push(&mut self, class_name: impl Into<String>, instance_id: u32, polygon: Vec<Point>) {
        self.annotations.push(Annotation {
            class_name: class_name.into(),
            instance_id,
            polygon,
        });
    }
}

/// Even-odd membership test of a single point (the PNPOLY crossing rule).
pub fn point_in_polygon(polygon: &[Point], p: Point) -> bool {
    let mut inside = false;
    let n = polygon.len();
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (vi, vj) = (polygon[i], polygon[j]);
        if (vi.y > p.y) != (vj.y > p.y) && p.x < (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x
        {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Scanline fill of one polygon with the even-odd rule on pixel centers.
/// Calls `paint(x, y)` for every covered pixel of a `width`×`height` frame.
///
/// Crossing abscissae are computed with exactly the expression used by
/// [`point_in_polygon`], so both agree pixel for pixel.
pub fn fill_polygon(polygon: &[Point], width: usize, height: usize, mut paint: impl FnMut(usize, usize)) {
    if polygon.len() < 3 || width == 0 || height == 0 {
        return;
    }
    let (min_y, max_y) = polygon
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    let y_start = min_y.ceil().max(0.0) as usize;
    let y_end = (max_y.floor().min((height - 1) as f64)).max(-1.0);
    if y_end < 0.0 {
        return;
    }
    let y_end = y_end as usize;
    let mut xs: Vec<f64> = Vec::with_capacity(8);
    let n = polygon.len();
    for y in y_start..=y_end {
        let fy = y as f64;
        xs.clear();
        let mut j = n - 1;
        for i in 0..n {
            let (vi, vj) = (polygon[i], polygon[j]);
            if (vi.y > fy) != (vj.y > fy) {
                xs.push((vj.x - vi.x) * (fy - vi.y) / (vj.y - vi.y) + vi.x);
            }
            j = i;
        }
        xs.sort_by(f64::total_cmp);
        // x is inside iff an odd number of crossings lie strictly right of it,
        // i.e. x ∈ [xs[k], xs[k+1]) for even k counted from the right end.
        let m = xs.len();
        let mut k = m % 2;
        while k + 1 < m {
            let lo = xs[k].ceil().max(0.0);
            let hi = xs[k + 1].ceil().min(width as f64);
            if hi > lo {
                for x in lo as usize..hi as usize {
                    paint(x, y);
                }
            }
            k += 2;
        }
    }
}

/// Shoelace area (absolute value).
pub fn polygon_area(polygon: &[Point]) -> f64 {
    let n = polygon.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        acc += a.x * b.y - b.x * a.y;
    }
    acc.abs() / 2.0
}

pub fn polygon_perimeter(polygon: &[Point]) -> f64 {
    let n = polygon.len();
    (0..n).map(|i| polygon[i].distance(&polygon[(i + 1) % n])).sum()
}

fn distinct_vertices(polygon: &[Point]) -> usize {
    let mut v: Vec<(u64, u64)> = polygon
        .iter()
        .map(|p| (p.x.to_bits(), p.y.to_bits()))
        .collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Rasterizes annotations onto a `size` frame. Vertices are given in a
/// `source_size` frame and rescaled with pixel areas aligned. Later
/// annotations overwrite earlier ones where they overlap.
pub fn rasterize_annotations(
    ann: &AnnotationSet,
    taxonomy: &ClassTaxonomy,
    size: (usize, usize),
    source_size: (usize, usize),
) -> Result<LabelMask, ImagingError> {
    if size.0 == 0 || size.1 == 0 || source_size.0 == 0 || source_size.1 == 0 {
        return Err(ImagingError::Empty);
    }
    let scaling = AffineTransform::frame_scaling(source_size, size);
    let mut mask = LabelMask::new(size.0, size.1);
    for (index, a) in ann.annotations.iter().enumerate() {
        let class_id = taxonomy
            .id_of(&a.class_name)
            .ok_or_else(|| ImagingError::UnknownClass(a.class_name.clone()))?;
        if distinct_vertices(&a.polygon) < 3 {
            return Err(ImagingError::DegeneratePolygon { index });
        }
        let poly: Vec<Point> = if source_size == size {
            a.polygon.clone()
        } else {
            a.polygon.iter().map(|&p| scaling.apply(p)).collect()
        };
        fill_polygon(&poly, size.0, size.1, |x, y| mask.set(x, y, class_id, a.instance_id));
    }
    Ok(mask)
}
