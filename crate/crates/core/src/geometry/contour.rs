//! Moore-neighbor tracing of a component's outer boundary.

use serde::{Deserialize, Serialize};

use super::components::Component;

/// Closed boundary as an ordered list of pixel coordinates. Consecutive
/// points (and the last/first pair) are 8-adjacent. Pixels on one-pixel-wide
/// parts of a shape appear once per pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<(usize, usize)>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

// Counter-clockwise as seen on screen (y down), starting at west.
const RING: [(i64, i64); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

fn ring_index(dx: i64, dy: i64) -> usize {
    RING.iter()
        .position(|&d| d == (dx, dy))
        .expect("backtrack pixel is a neighbor")
}

/// Traces the outer boundary counter-clockwise (on screen), starting from the
/// component's first pixel in raster order. Holes are not visited.
pub fn trace_contour(component: &Component) -> Contour {
    let bitmap = component.bitmap();
    let (sx, sy) = component.pixels[0];
    let start = (sx as i64, sy as i64);
    let fg = |p: (i64, i64)| bitmap.get(p.0, p.1);

    let mut points = vec![(sx, sy)];
    let mut current = start;
    // the west neighbor of the first raster pixel is never part of the component
    let mut backtrack = (start.0 - 1, start.1);
    let mut second: Option<(i64, i64)> = None;
    let limit = 4 * component.area() + 8;

    for _ in 0..limit {
        let from = ring_index(backtrack.0 - current.0, backtrack.1 - current.1);
        let mut next = None;
        let mut prev_checked = backtrack;
        for k in 1..=8 {
            let (dx, dy) = RING[(from + k) % 8];
            let cand = (current.0 + dx, current.1 + dy);
            if fg(cand) {
                next = Some(cand);
                break;
            }
            prev_checked = cand;
        }
        let Some(next) = next else {
            // isolated pixel
            break;
        };
        if current == start {
            match second {
                None => second = Some(next),
                Some(s) if s == next => break,
                Some(_) => {}
            }
        }
        backtrack = prev_checked;
        current = next;
        points.push((current.0 as usize, current.1 as usize));
    }
    // the final step re-enters the start pixel, which is already the first entry
    if points.len() > 1 && points.last() == Some(&(sx, sy)) {
        points.pop();
    }
    Contour { points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::connected_components;
    use crate::imaging::LabelMask;

    fn comp(pixels: &[(usize, usize)], w: usize, h: usize) -> Component {
        let mut m = LabelMask::new(w, h);
        for &(x, y) in pixels {
            m.set(x, y, 1, 1);
        }
        connected_components(&m).remove(0)
    }

    #[test]
    fn single_pixel() {
        let c = comp(&[(2, 3)], 5, 5);
        assert_eq!(trace_contour(&c).points, vec![(2, 3)]);
    }

    #[test]
    fn three_by_three_square() {
        let px: Vec<_> = (0..3).flat_map(|y| (0..3).map(move |x| (x, y))).collect();
        let c = comp(&px, 3, 3);
        // hand-executed Moore trace: down the left side, along the bottom,
        // up the right side, back along the top
        assert_eq!(
            trace_contour(&c).points,
            vec![(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0)]
        );
    }

    #[test]
    fn diagonal_pair() {
        let c = comp(&[(0, 0), (1, 1)], 3, 3);
        assert_eq!(trace_contour(&c).points, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn ring_returns_outer_boundary_only() {
        let mut px = Vec::new();
        for y in 0..5 {
            for x in 0..5 {
                if !(x == 2 && y == 2) {
                    px.push((x, y));
                }
            }
        }
        let c = comp(&px, 5, 5);
        let ct = trace_contour(&c);
        assert_eq!(ct.len(), 16);
        assert!(ct.points.iter().all(|&(x, y)| x == 0 || y == 0 || x == 4 || y == 4));
    }

    #[test]
    fn horizontal_line_is_walked_both_ways() {
        let c = comp(&[(1, 1), (2, 1), (3, 1)], 5, 3);
        assert_eq!(trace_contour(&c).points, vec![(1, 1), (2, 1), (3, 1), (2, 1)]);
    }
}
