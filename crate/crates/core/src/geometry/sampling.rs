//! Sparse control points along a contour: the four outermost points plus
//! points spread uniformly by arc length between them.

use serde::{Deserialize, Serialize};

use super::affine::Point;
use super::contour::Contour;

/// Which outermost point a control point represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extreme {
    MinX,
    MaxX,
    MinY,
    MaxY,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPoints {
    /// Points in trace order.
    pub points: Vec<Point>,
    /// `true` where the point is one of the outermost points.
    pub is_extreme: Vec<bool>,
    /// Index into `points` of the min-x, max-x, min-y and max-y representatives.
    pub extremes: [usize; 4],
}

impl ControlPoints {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn extreme(&self, which: Extreme) -> Point {
        let i = match which {
            Extreme::MinX => 0,
            Extreme::MaxX => 1,
            Extreme::MinY => 2,
            Extreme::MaxY => 3,
        };
        self.points[self.extremes[i]]
    }
}

/// Control-point count for a contour: 16, or 32 once the contour is longer
/// than 512 points.
pub fn default_point_count(contour_len: usize) -> usize {
    if contour_len > 512 {
        32
    } else {
        16
    }
}

/// Contour indices of the first min-x, max-x, min-y and max-y points in
/// trace order.
fn extreme_indices(pts: &[(usize, usize)]) -> [usize; 4] {
    let mut ext = [0usize; 4];
    for (i, &(x, y)) in pts.iter().enumerate() {
        let best = |j: usize| pts[j];
        if x < best(ext[0]).0 {
            ext[0] = i;
        }
        if x > best(ext[1]).0 {
            ext[1] = i;
        }
        if y < best(ext[2]).1 {
            ext[2] = i;
        }
        if y > best(ext[3]).1 {
            ext[3] = i;
        }
    }
    ext
}

/// Samples `n` (≥ 4) control points from a contour. The outermost points are
/// always kept (ties broken by first occurrence in trace order); the
/// remaining points split the arcs between consecutive outermost points into
/// equal arc-length steps, each arc receiving a share proportional to its
/// length. Repeated coordinates are dropped. Contours with at most `n`
/// distinct points are returned whole.
pub fn sample_contour(contour: &Contour, n: usize) -> ControlPoints {
    let n = n.max(4);
    let pts = &contour.points;
    assert!(!pts.is_empty(), "contour of a nonempty component");
    let len = pts.len();
    let ext = extreme_indices(pts);

    // first occurrence index of every coordinate, to detect repeats
    let mut first_seen: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::with_capacity(len);
    for (i, p) in pts.iter().enumerate() {
        first_seen.entry(*p).or_insert(i);
    }
    let distinct = first_seen.len();

    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut taken = std::collections::HashSet::new();
    let mut take = |i: usize, chosen: &mut Vec<usize>| -> bool {
        if taken.insert(pts[i]) {
            chosen.push(i);
            true
        } else {
            false
        }
    };

    if distinct <= n {
        for i in 0..len {
            take(i, &mut chosen);
        }
    } else {
        for &e in &ext {
            take(e, &mut chosen);
        }
        // cumulative arc length; cum[len] closes the loop
        let mut cum = vec![0.0f64; len + 1];
        for i in 1..=len {
            let (a, b) = (pts[i - 1], pts[i % len]);
            let d = ((a.0 as f64 - b.0 as f64).powi(2) + (a.1 as f64 - b.1 as f64).powi(2)).sqrt();
            cum[i] = cum[i - 1] + d;
        }
        let perimeter = cum[len];
        let mut anchors: Vec<usize> = chosen.clone();
        anchors.sort_unstable();
        let k = anchors.len();
        let arcs: Vec<(usize, f64)> = (0..k)
            .map(|j| {
                let (a, b) = (anchors[j], anchors[(j + 1) % k]);
                let l = if j + 1 < k {
                    cum[b] - cum[a]
                } else {
                    perimeter - cum[a] + cum[b]
                };
                (a, l)
            })
            .collect();
        let shares = allocate(n - chosen.len(), &arcs.iter().map(|a| a.1).collect::<Vec<_>>());

        let index_at = |s: f64| -> usize {
            let s = s.rem_euclid(perimeter);
            // nearest contour index by arc length
            let hi = cum[..len].partition_point(|&c| c <= s);
            let lo = hi.saturating_sub(1);
            let next = hi.min(len);
            let next_pos = if next == len { perimeter } else { cum[next] };
            if (next_pos - s) < (s - cum[lo]) {
                next % len
            } else {
                lo
            }
        };
        for (&(a, l), &m) in arcs.iter().zip(&shares) {
            for j in 1..=m {
                let target = cum[a] + l * j as f64 / (m + 1) as f64;
                let i = index_at(target);
                if !take(i, &mut chosen) {
                    // nearest index along the contour with an unused coordinate
                    for off in 1..len {
                        if take((i + off) % len, &mut chosen) || take((i + len - off) % len, &mut chosen) {
                            break;
                        }
                    }
                }
            }
        }
    }
    chosen.sort_unstable();
    let points: Vec<Point> = chosen.iter().map(|&i| Point::from(pts[i])).collect();
    let position = |ci: usize| {
        let p = pts[ci];
        chosen
            .iter()
            .position(|&i| pts[i] == p)
            .expect("extremes are always selected")
    };
    let extremes = [position(ext[0]), position(ext[1]), position(ext[2]), position(ext[3])];
    let mut is_extreme = vec![false; points.len()];
    for &e in &extremes {
        is_extreme[e] = true;
    }
    ControlPoints {
        points,
        is_extreme,
        extremes,
    }
}

/// Largest-remainder split of `total` proportionally to `weights`.
fn allocate(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 || weights.is_empty() {
        let mut v = vec![0; weights.len().max(1)];
        v[0] = total;
        v.truncate(weights.len().max(1));
        return v;
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        out[i] += 1;
        rest -= 1;
    }
    out
}
