use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::affine::Point;
use crate::imaging::LabelMask;

/// Inclusive pixel bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }
}

/// A maximal 8-connected region of pixels sharing class and instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub class_id: u8,
    pub instance_id: u32,
    /// Row-major sorted `(x, y)` pixels.
    pub pixels: Vec<(usize, usize)>,
    pub bbox: BBox,
}

impl Component {
    /// Builds a component from an arbitrary pixel list (sorted and deduplicated
    /// here). Connectivity is the caller's responsibility.
    pub fn from_pixels(class_id: u8, instance_id: u32, mut pixels: Vec<(usize, usize)>) -> Self {
        assert!(!pixels.is_empty(), "components are nonempty");
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let bbox = pixels.iter().fold(
            BBox {
                min_x: usize::MAX,
                min_y: usize::MAX,
                max_x: 0,
                max_y: 0,
            },
            |b, &(x, y)| BBox {
                min_x: b.min_x.min(x),
                min_y: b.min_y.min(y),
                max_x: b.max_x.max(x),
                max_y: b.max_y.max(y),
            },
        );
        Self {
            class_id,
            instance_id,
            pixels,
            bbox,
        }
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pixels
            .binary_search_by_key(&(y, x), |&(px, py)| (py, px))
            .is_ok()
    }

    pub fn centroid(&self) -> Point {
        let n = self.pixels.len() as f64;
        let (sx, sy) = self
            .pixels
            .iter()
            .fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x as f64, ay + y as f64));
        Point::new(sx / n, sy / n)
    }

    /// Dense occupancy grid over the bounding box.
    pub fn bitmap(&self) -> ComponentBitmap {
        let (w, h) = (self.bbox.width(), self.bbox.height());
        let mut bits = vec![false; w * h];
        for &(x, y) in &self.pixels {
            bits[(y - self.bbox.min_y) * w + (x - self.bbox.min_x)] = true;
        }
        ComponentBitmap {
            origin: (self.bbox.min_x, self.bbox.min_y),
            width: w,
            height: h,
            bits,
        }
    }
}

/// Occupancy of a component over its bounding box, with signed lookups that
/// treat everything outside the box as empty.
#[derive(Clone, Debug)]
pub struct ComponentBitmap {
    pub origin: (usize, usize),
    pub width: usize,
    pub height: usize,
    bits: Vec<bool>,
}

impl ComponentBitmap {
    #[inline]
    pub fn get(&self, x: i64, y: i64) -> bool {
        let lx = x - self.origin.0 as i64;
        let ly = y - self.origin.1 as i64;
        if lx < 0 || ly < 0 || lx >= self.width as i64 || ly >= self.height as i64 {
            return false;
        }
        self.bits[ly as usize * self.width + lx as usize]
    }
}

const NEIGHBORS_8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Splits the foreground of `mask` into 8-connected components of equal
/// `(class, instance)`. Components are ordered by their first pixel in
/// raster order.
pub fn connected_components(mask: &LabelMask) -> Vec<Component> {
    let (w, h) = mask.size();
    let classes = mask.class_ids();
    let instances = mask.instance_ids();
    let mut visited = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if visited[start] || classes[start] == 0 {
            continue;
        }
        let key = (classes[start], instances[start]);
        visited[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            pixels.push((x as usize, y as usize));
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !visited[j] && (classes[j], instances[j]) == key {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        out.push(Component::from_pixels(key.0, key.1, pixels));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> LabelMask {
        let h = rows.len();
        let w = rows[0].len();
        let mut m = LabelMask::new(w, h);
        for (y, r) in rows.iter().enumerate() {
            for (x, ch) in r.chars().enumerate() {
                let c = ch.to_digit(10).unwrap() as u8;
                m.set(x, y, c, u32::from(c > 0));
            }
        }
        m
    }

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&LabelMask::new(5, 5)).is_empty());
    }

    #[test]
    fn separated_squares() {
        let m = mask_from(&["1110111", "1110111", "1110111"]);
        let cs = connected_components(&m);
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.area() == 9));
        assert_eq!(cs[0].bbox.min_x, 0);
        assert_eq!(cs[1].bbox.min_x, 4);
    }

    #[test]
    fn diagonal_touch_is_connected() {
        let m = mask_from(&["10", "01"]);
        assert_eq!(connected_components(&m).len(), 1);
    }

    #[test]
    fn classes_and_instances_split() {
        let mut m = mask_from(&["1122"]);
        m.set(1, 0, 1, 5);
        let cs = connected_components(&m);
        assert_eq!(cs.len(), 3);
        assert_eq!((cs[1].class_id, cs[1].instance_id), (1, 5));
    }

    #[test]
    fn bitmap_lookup() {
        let m = mask_from(&["000", "011", "010"]);
        let c = &connected_components(&m)[0];
        let b = c.bitmap();
        assert!(b.get(1, 1) && b.get(2, 1) && b.get(1, 2));
        assert!(!b.get(2, 2) && !b.get(-1, 0) && !b.get(0, 0));
        assert!(c.contains(2, 1) && !c.contains(0, 0));
        let ctr = c.centroid();
        assert!((ctr.x - 4.0 / 3.0).abs() < 1e-12 && (ctr.y - 4.0 / 3.0).abs() < 1e-12);
    }
}
