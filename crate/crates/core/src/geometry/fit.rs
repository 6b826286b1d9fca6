//! Least-squares affine estimation from point pairs, with optional RANSAC.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::affine::{AffineTransform, Point};
use super::GeometryError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub use_ransac: bool,
    pub ransac_iters: usize,
    /// Residual (px) under which a pair counts as an inlier.
    pub inlier_px: f64,
    pub seed: u64,
    /// Smallest accepted `|det(A)|`.
    pub min_abs_det: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            use_ransac: false,
            ransac_iters: 200,
            inlier_px: 2.0,
            seed: 0,
            min_abs_det: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub transform: AffineTransform,
    /// Root-mean-square residual over the pairs used in the final fit.
    pub rms: f64,
    /// Indices of the pairs used in the final fit.
    pub inliers: Vec<usize>,
}

/// Plain least squares over `pairs`, no plausibility check.
fn solve(pairs: &[(Point, Point)]) -> Result<AffineTransform, GeometryError> {
    if pairs.len() < 3 {
        return Err(GeometryError::DegenerateFit(format!(
            "{} pairs, need at least 3",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut tx, mut ty) = (0.0, 0.0, 0.0, 0.0);
    for (p, q) in pairs {
        sx += p.x;
        sy += p.y;
        tx += q.x;
        ty += q.y;
    }
    let (cx, cy, dx, dy) = (sx / n, sy / n, tx / n, ty / n);

    // centered normal equations: S · [a b]ᵀ = r for each output row
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let (mut ux, mut uy, mut vx, mut vy) = (0.0, 0.0, 0.0, 0.0);
    for (p, q) in pairs {
        let (px, py) = (p.x - cx, p.y - cy);
        let (qx, qy) = (q.x - dx, q.y - dy);
        sxx += px * px;
        sxy += px * py;
        syy += py * py;
        ux += px * qx;
        uy += py * qx;
        vx += px * qy;
        vy += py * qy;
    }
    let det = sxx * syy - sxy * sxy;
    let trace = sxx + syy;
    if trace <= 0.0 || det <= 1e-12 * trace * trace {
        return Err(GeometryError::DegenerateFit("collinear source points".into()));
    }
    let a = (syy * ux - sxy * uy) / det;
    let b = (sxx * uy - sxy * ux) / det;
    let c = (syy * vx - sxy * vy) / det;
    let d = (sxx * vy - sxy * vx) / det;
    Ok(AffineTransform::new(
        a,
        b,
        dx - a * cx - b * cy,
        c,
        d,
        dy - c * cx - d * cy,
    ))
}

fn residual(t: &AffineTransform, pair: &(Point, Point)) -> f64 {
    t.apply(pair.0).distance(&pair.1)
}

fn rms(t: &AffineTransform, pairs: &[(Point, Point)], idx: &[usize]) -> f64 {
    let s: f64 = idx.iter().map(|&i| residual(t, &pairs[i]).powi(2)).sum();
    (s / idx.len() as f64).sqrt()
}

/// Fits `A·p + t ≈ p'` over `(p, p')` pairs.
pub fn fit_affine(pairs: &[(Point, Point)], cfg: &FitConfig) -> Result<AffineFit, GeometryError> {
    let all: Vec<usize> = (0..pairs.len()).collect();
    let mut transform = solve(pairs)?;
    let mut inliers = all;

    if cfg.use_ransac && pairs.len() > 3 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut best: Option<(Vec<usize>, f64)> = None;
        for _ in 0..cfg.ransac_iters {
            let pick: Vec<(Point, Point)> = sample(&mut rng, pairs.len(), 3)
                .into_iter()
                .map(|i| pairs[i])
                .collect();
            let Ok(t) = solve(&pick) else { continue };
            let cons: Vec<usize> = (0..pairs.len())
                .filter(|&i| residual(&t, &pairs[i]) <= cfg.inlier_px)
                .collect();
            if cons.len() < 3 {
                continue;
            }
            let score = rms(&t, pairs, &cons);
            let better = match &best {
                None => true,
                Some((b, s)) => cons.len() > b.len() || (cons.len() == b.len() && score < *s),
            };
            if better {
                best = Some((cons, score));
            }
        }
        if let Some((cons, _)) = best {
            let subset: Vec<(Point, Point)> = cons.iter().map(|&i| pairs[i]).collect();
            if let Ok(t) = solve(&subset) {
                transform = t;
                inliers = cons;
            }
        }
    }

    if !transform.is_finite() || transform.det().abs() < cfg.min_abs_det {
        return Err(GeometryError::ImplausibleTransform(format!(
            "det(A) = {:.3e}",
            transform.det()
        )));
    }
    let rms = rms(&transform, pairs, &inliers);
    Ok(AffineFit {
        transform,
        rms,
        inliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn identity_from_three_points() {
        let pairs = [
            (p(0.0, 0.0), p(0.0, 0.0)),
            (p(1.0, 0.0), p(1.0, 0.0)),
            (p(0.0, 1.0), p(0.0, 1.0)),
        ];
        let f = fit_affine(&pairs, &FitConfig::default()).unwrap();
        assert!(f.transform.distance(&AffineTransform::identity()) < 1e-12);
    }

    #[test]
    fn translation() {
        let src = [p(0.0, 0.0), p(4.0, 1.0), p(2.0, 5.0)];
        let pairs: Vec<_> = src.iter().map(|&s| (s, p(s.x + 2.0, s.y + 3.0))).collect();
        let f = fit_affine(&pairs, &FitConfig::default()).unwrap();
        assert!(f.transform.distance(&AffineTransform::translation(2.0, 3.0)) < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let cfg = FitConfig::default();
        let two = [(p(0.0, 0.0), p(0.0, 0.0)), (p(1.0, 0.0), p(1.0, 0.0))];
        assert!(matches!(fit_affine(&two, &cfg), Err(GeometryError::DegenerateFit(_))));
        let line: Vec<_> = (0..5).map(|i| (p(i as f64, 2.0 * i as f64), p(0.0, 0.0))).collect();
        assert!(matches!(fit_affine(&line, &cfg), Err(GeometryError::DegenerateFit(_))));
    }

    #[test]
    fn collapsing_map_is_implausible() {
        let src = [p(0.0, 0.0), p(10.0, 0.0), p(0.0, 10.0), p(10.0, 10.0)];
        let pairs: Vec<_> = src.iter().map(|&s| (s, p(s.x, 0.0))).collect();
        assert!(matches!(
            fit_affine(&pairs, &FitConfig::default()),
            Err(GeometryError::ImplausibleTransform(_))
        ));
    }

    #[test]
    fn ransac_rejects_outlier() {
        let t = AffineTransform::new(1.1, 0.05, 3.0, -0.02, 0.95, -1.0);
        let mut pairs: Vec<_> = (0..12)
            .map(|i| {
                let s = p((i * 7 % 13) as f64 * 4.0, (i * 5 % 11) as f64 * 3.0);
                (s, t.apply(s))
            })
            .collect();
        pairs[4].1 = p(pairs[4].1.x + 40.0, pairs[4].1.y - 25.0);
        let plain = fit_affine(&pairs, &FitConfig::default()).unwrap();
        assert!(plain.transform.distance(&t) > 0.1);
        let cfg = FitConfig {
            use_ransac: true,
            ..FitConfig::default()
        };
        let robust = fit_affine(&pairs, &cfg).unwrap();
        assert!(robust.transform.distance(&t) < 1e-9);
        assert_eq!(robust.inliers.len(), 11);
        assert_eq!(robust, fit_affine(&pairs, &cfg).unwrap());
    }
}
