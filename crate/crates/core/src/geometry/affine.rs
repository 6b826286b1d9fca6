use serde::{Deserialize, Serialize};

/// 2-D point in pixel coordinates. Pixel `(x, y)` has its center at the
/// integer coordinates `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl From<(usize, usize)> for Point {
    fn from((x, y): (usize, usize)) -> Self {
        Point::new(x as f64, y as f64)
    }
}

/// `[A | t]` with `p' = A·p + t`. Serialized as a row-major 2×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AffineTransform {
    pub m: [[f64; 3]; 2],
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl AffineTransform {
    pub const fn new(a: f64, b: f64, tx: f64, c: f64, d: f64, ty: f64) -> Self {
        Self {
            m: [[a, b, tx], [c, d, ty]],
        }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)
    }

    pub const fn translation(dx: f64, dy: f64) -> Self {
        Self::new(1.0, 0.0, dx, 0.0, 1.0, dy)
    }

    pub const fn scale(sx: f64, sy: f64) -> Self {
        Self::new(sx, 0.0, 0.0, 0.0, sy, 0.0)
    }

    /// Rotation by `angle` radians about `center`. Positive angles turn +x
    /// towards +y (clockwise on screen, where y points down).
    pub fn rotation_about(center: Point, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let r = Self::new(c, -s, 0.0, s, c, 0.0);
        Self::translation(center.x, center.y)
            .compose(&r)
            .compose(&Self::translation(-center.x, -center.y))
    }

    /// Maps pixel coordinates of a `src` frame onto a `dst` frame of a
    /// different size, pixel areas aligned: `x' = (x + 0.5)·W'/W − 0.5`.
    pub fn frame_scaling(src: (usize, usize), dst: (usize, usize)) -> Self {
        let sx = dst.0 as f64 / src.0 as f64;
        let sy = dst.1 as f64 / src.1 as f64;
        Self::new(sx, 0.0, 0.5 * sx - 0.5, 0.0, sy, 0.5 * sy - 0.5)
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        let [[a, b, tx], [c, d, ty]] = self.m;
        Point::new(a * p.x + b * p.y + tx, c * p.x + d * p.y + ty)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &AffineTransform) -> AffineTransform {
        let [[a, b, tx], [c, d, ty]] = self.m;
        let [[e, f, ux], [g, h, uy]] = other.m;
        Self::new(
            a * e + b * g,
            a * f + b * h,
            a * ux + b * uy + tx,
            c * e + d * g,
            c * f + d * h,
            c * ux + d * uy + ty,
        )
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    pub fn inverse(&self) -> Option<AffineTransform> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let [[a, b, tx], [c, d, ty]] = self.m;
        let ia = d / det;
        let ib = -b / det;
        let ic = -c / det;
        let id = a / det;
        Some(Self::new(
            ia,
            ib,
            -(ia * tx + ib * ty),
            ic,
            id,
            -(ic * tx + id * ty),
        ))
    }

    /// Frobenius norm of the difference of the two 2×3 matrices.
    pub fn distance(&self, other: &AffineTransform) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_invert() {
        let t = AffineTransform::new(1.2, 0.1, 4.0, -0.05, 0.9, -2.0);
        let inv = t.inverse().unwrap();
        let id = t.compose(&inv);
        assert!(id.distance(&AffineTransform::identity()) < 1e-12);
        let p = Point::new(3.0, -7.5);
        let q = inv.apply(t.apply(p));
        assert!(p.distance(&q) < 1e-12);
    }

    #[test]
    fn frame_scaling_identity_is_exact() {
        let s = AffineTransform::frame_scaling((17, 9), (17, 9));
        assert_eq!(s, AffineTransform::identity());
    }

    #[test]
    fn frame_scaling_aligns_pixel_edges() {
        let s = AffineTransform::frame_scaling((4, 4), (8, 8));
        // left edge of the frame (-0.5) maps to itself, right edge too
        assert!((s.apply(Point::new(-0.5, -0.5)).x + 0.5).abs() < 1e-12);
        assert!((s.apply(Point::new(3.5, 3.5)).x - 7.5).abs() < 1e-12);
    }

    #[test]
    fn rotation_about_center_fixes_center() {
        let c = Point::new(5.0, 7.0);
        let r = AffineTransform::rotation_about(c, 0.7);
        assert!(r.apply(c).distance(&c) < 1e-12);
        assert!((r.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serializes_as_matrix() {
        let t = AffineTransform::translation(2.0, 3.0);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, "[[1.0,0.0,2.0],[0.0,1.0,3.0]]");
        let p: Point = serde_json::from_str("[1.5,2]").unwrap();
        assert_eq!(p, Point::new(1.5, 2.0));
    }
}
