//! Scene description and seeded scene generation.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::appearance::{appearance, wavelengths, Appearance, DEFAULT_BANDS, WAVELENGTH_RANGE_NM};
use super::SynthError;
use crate::geometry::{AffineTransform, Point};
use crate::imaging::{fill_polygon, Rect, BASKET, CARDBOARD, FILAMENT, FILM, TRASH_BAG, VIDEO_TAPE};

/// Instance counts per class in the real dataset, film to trash bag.
pub const DATASET_CLASS_COUNTS: [f64; 6] = [339.0, 300.0, 68.0, 287.0, 111.0, 954.0];

const ELLIPSE_VERTICES: usize = 28;
const PLACEMENT_ATTEMPTS: usize = 50;
const SHRINK_STEPS: usize = 3;
const SHRINK_FACTOR: f64 = 0.85;
/// Free pixels kept between objects and from the frame borders.
const GAP_PX: i64 = 3;

pub fn is_ribbon_class(class: u8) -> bool {
    class == VIDEO_TAPE || class == FILAMENT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub rgb_size: (usize, usize),
    pub hsi_size: (usize, usize),
    /// Part of the RGB frame that the hyperspectral camera also sees.
    pub rgb_crop: Rect,
    pub bands: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Relative class frequencies, film to trash bag.
    pub class_weights: [f64; 6],
    /// Chance of adding a tape or filament ribbon to a scene that drew none.
    pub ribbon_probability: f64,
    /// Residual misalignment of the rig around the nominal crop+resize.
    pub rig_translation_px: f64,
    pub rig_rotation_deg: f64,
    pub rig_scale: f64,
    /// Per-object distortion on top of the rig.
    pub jitter_translation_px: f64,
    pub jitter_rotation_deg: f64,
    pub jitter_scale: f64,
    /// Strength of a perspective-like warp of the hyperspectral view; 0 keeps
    /// the views affinely related.
    pub projective: f64,
    pub rgb_noise: f64,
    pub spectral_noise: f64,
    /// Relative brightness modulation of the surface textures.
    pub texture_amplitude: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            rgb_size: (320, 316),
            hsi_size: (256, 256),
            rgb_crop: Rect::new(16, 14, 288, 288),
            bands: DEFAULT_BANDS,
            min_objects: 4,
            max_objects: 7,
            class_weights: DATASET_CLASS_COUNTS,
            ribbon_probability: 0.25,
            rig_translation_px: 6.0,
            rig_rotation_deg: 2.0,
            rig_scale: 0.03,
            jitter_translation_px: 4.0,
            jitter_rotation_deg: 4.0,
            jitter_scale: 0.04,
            projective: 0.0,
            rgb_noise: 0.01,
            spectral_noise: 0.01,
            texture_amplitude: 0.25,
        }
    }
}

impl SceneConfig {
    /// Same frame for both views, no misalignment, no noise.
    pub fn aligned() -> Self {
        Self {
            rgb_size: (256, 256),
            rgb_crop: Rect::full(256, 256),
            rig_translation_px: 0.0,
            rig_rotation_deg: 0.0,
            rig_scale: 0.0,
            jitter_translation_px: 0.0,
            jitter_rotation_deg: 0.0,
            jitter_scale: 0.0,
            rgb_noise: 0.0,
            spectral_noise: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.rgb_size.0 < 16 || self.rgb_size.1 < 16 || self.hsi_size.0 < 16 || self.hsi_size.1 < 16 {
            return bad("frames must be at least 16x16");
        }
        if self.rgb_crop.width < 16 || self.rgb_crop.height < 16 {
            return bad("rgb_crop must be at least 16x16");
        }
        if !self.rgb_crop.fits_within(self.rgb_size.0, self.rgb_size.1) {
            return bad("rgb_crop exceeds the RGB frame");
        }
        if self.bands == 0 {
            return bad("bands must be positive");
        }
        if self.min_objects > self.max_objects {
            return bad("min_objects exceeds max_objects");
        }
        if self.class_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || self.class_weights.iter().sum::<f64>() <= 0.0
        {
            return bad("class_weights must be nonnegative with a positive sum");
        }
        if !(0.0..=1.0).contains(&self.ribbon_probability) {
            return bad("ribbon_probability must lie in [0, 1]");
        }
        let amounts = [
            self.rig_translation_px,
            self.rig_rotation_deg,
            self.jitter_translation_px,
            self.jitter_rotation_deg,
            self.rgb_noise,
            self.spectral_noise,
            self.texture_amplitude,
        ];
        if amounts.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("distortion, noise and texture amounts must be nonnegative");
        }
        if !(0.0..0.5).contains(&self.rig_scale) || !(0.0..0.5).contains(&self.jitter_scale) {
            return bad("scale ranges must lie in [0, 0.5)");
        }
        if !self.projective.is_finite() || self.projective.abs() * self.hsi_size.0.max(self.hsi_size.1) as f64 >= 0.5 {
            return bad("projective strength too large for the frame");
        }
        if self.texture_amplitude >= 1.0 {
            return bad("texture_amplitude must be below 1");
        }
        Ok(())
    }
}

/// Sum of plane waves, evaluated in object-local coordinates; values in
/// `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Texture {
    /// `(kx, ky, phase)` per wave.
    pub waves: Vec<[f64; 3]>,
}

impl Texture {
    pub fn flat() -> Self {
        Self { waves: Vec::new() }
    }

    fn random(rng: &mut ChaCha8Rng) -> Self {
        let waves = (0..4)
            .map(|_| {
                let period: f64 = rng.random_range(5.0..14.0);
                let dir: f64 = rng.random_range(0.0..TAU);
                let k = TAU / period;
                [k * dir.cos(), k * dir.sin(), rng.random_range(0.0..TAU)]
            })
            .collect();
        Self { waves }
    }

    pub fn eval(&self, p: Point) -> f64 {
        if self.waves.is_empty() {
            return 0.0;
        }
        let s: f64 = self.waves.iter().map(|w| (w[0] * p.x + w[1] * p.y + w[2]).sin()).sum();
        s / self.waves.len() as f64
    }
}

/// Object outline in object-local coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Polygon { vertices: Vec<Point> },
    Ellipse { rx: f64, ry: f64 },
    Ribbon { centerline: Vec<Point>, width: f64 },
}

impl Shape {
    pub fn outline(&self) -> Vec<Point> {
        match self {
            Shape::Polygon { vertices } => vertices.clone(),
            Shape::Ellipse { rx, ry } => (0..ELLIPSE_VERTICES)
                .map(|i| {
                    let a = TAU * i as f64 / ELLIPSE_VERTICES as f64;
                    Point::new(rx * a.cos(), ry * a.sin())
                })
                .collect(),
            Shape::Ribbon { centerline, width } => ribbon_outline(centerline, *width),
        }
    }

    /// Largest distance of the outline from the local origin.
    pub fn radius(&self) -> f64 {
        self.outline()
            .iter()
            .map(|p| p.x.hypot(p.y))
            .fold(0.0, f64::max)
    }
}

fn ribbon_outline(centerline: &[Point], width: f64) -> Vec<Point> {
    let n = centerline.len();
    let half = width / 2.0;
    let normals: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let a = centerline[i.saturating_sub(1)];
            let b = centerline[(i + 1).min(n - 1)];
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len = dx.hypot(dy).max(1e-12);
            (-dy / len, dx / len)
        })
        .collect();
    let left = centerline
        .iter()
        .zip(&normals)
        .map(|(c, nrm)| Point::new(c.x + half * nrm.0, c.y + half * nrm.1));
    let right: Vec<Point> = centerline
        .iter()
        .zip(&normals)
        .map(|(c, nrm)| Point::new(c.x - half * nrm.0, c.y - half * nrm.1))
        .collect();
    left.chain(right.into_iter().rev()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub instance_id: u32,
    pub class_id: u8,
    pub shape: Shape,
    /// Object-local → RGB frame.
    pub pose: AffineTransform,
    /// Extra per-object distortion applied after the rig, in the
    /// hyperspectral frame.
    pub jitter: AffineTransform,
    pub texture: Texture,
}

impl ObjectSpec {
    /// Outline in RGB pixel coordinates.
    pub fn polygon(&self) -> Vec<Point> {
        self.shape.outline().into_iter().map(|p| self.pose.apply(p)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevels {
    pub rgb: f64,
    pub spectral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub rgb_size: (usize, usize),
    pub hsi_size: (usize, usize),
    pub rgb_crop: Rect,
    pub wavelengths_nm: Vec<f64>,
    /// Appearance per class id; 0 is the background.
    pub palette: BTreeMap<u8, Appearance>,
    /// RGB frame → hyperspectral frame, shared by all objects.
    pub rig: AffineTransform,
    pub projective: f64,
    pub objects: Vec<ObjectSpec>,
    pub background_texture: Texture,
    pub texture_amplitude: f64,
    pub noise: NoiseLevels,
}

impl SceneSpec {
    /// RGB frame → hyperspectral frame map of one object, without the
    /// projective part.
    pub fn object_affine(&self, obj: &ObjectSpec) -> AffineTransform {
        obj.jitter.compose(&self.rig)
    }

    fn center(&self) -> Point {
        Point::new(
            (self.hsi_size.0 as f64 - 1.0) / 2.0,
            (self.hsi_size.1 as f64 - 1.0) / 2.0,
        )
    }

    /// Applies the projective part of the hyperspectral view.
    pub fn project(&self, p: Point) -> Point {
        if self.projective == 0.0 {
            return p;
        }
        let c = self.center();
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        let f = 1.0 + self.projective * dx;
        Point::new(c.x + dx / f, c.y + dy / f)
    }

    pub fn unproject(&self, p: Point) -> Point {
        if self.projective == 0.0 {
            return p;
        }
        let c = self.center();
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        let f = 1.0 - self.projective * dx;
        Point::new(c.x + dx / f, c.y + dy / f)
    }

    pub fn object(&self, instance_id: u32) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.instance_id == instance_id)
    }
}

/// Scale, rotation and translation about `center`, each drawn uniformly
/// from the given half-ranges.
fn random_similarity(
    rng: &mut ChaCha8Rng,
    center: Point,
    translation: f64,
    rotation_deg: f64,
    scale: f64,
) -> AffineTransform {
    let mut sym = |h: f64| if h > 0.0 { rng.random_range(-h..=h) } else { 0.0 };
    let (tx, ty) = (sym(translation), sym(translation));
    let angle = sym(rotation_deg).to_radians();
    let s = 1.0 + sym(scale);
    let (sn, cs) = angle.sin_cos();
    let core = AffineTransform::new(s * cs, -s * sn, 0.0, s * sn, s * cs, 0.0);
    AffineTransform::translation(center.x + tx, center.y + ty)
        .compose(&core)
        .compose(&AffineTransform::translation(-center.x, -center.y))
}

fn random_shape(rng: &mut ChaCha8Rng, class: u8) -> Shape {
    match class {
        FILM => {
            let n = rng.random_range(9..=13usize);
            let r0: f64 = rng.random_range(16.0..28.0);
            let vertices = (0..n)
                .map(|k| {
                    let a = TAU * (k as f64 + rng.random_range(-0.25..0.25)) / n as f64;
                    let r = if k % 2 == 0 {
                        r0 * rng.random_range(0.8..1.0)
                    } else {
                        r0 * rng.random_range(0.45..0.7)
                    };
                    Point::new(r * a.cos(), r * a.sin())
                })
                .collect();
            Shape::Polygon { vertices }
        }
        BASKET | CARDBOARD => {
            let (w, h): (f64, f64) = if class == BASKET {
                (rng.random_range(34.0..56.0), rng.random_range(26.0..44.0))
            } else {
                (rng.random_range(30.0..52.0), rng.random_range(22.0..40.0))
            };
            let (hw, hh) = (w / 2.0, h / 2.0);
            let vertices = if class == BASKET {
                let c = 0.2 * w.min(h);
                vec![
                    Point::new(-hw + c, -hh),
                    Point::new(hw - c, -hh),
                    Point::new(hw, -hh + c),
                    Point::new(hw, hh - c),
                    Point::new(hw - c, hh),
                    Point::new(-hw + c, hh),
                    Point::new(-hw, hh - c),
                    Point::new(-hw, -hh + c),
                ]
            } else {
                vec![
                    Point::new(-hw, -hh),
                    Point::new(hw, -hh),
                    Point::new(hw, hh),
                    Point::new(-hw, hh),
                ]
            };
            Shape::Polygon { vertices }
        }
        TRASH_BAG => Shape::Ellipse {
            rx: rng.random_range(22.0..36.0),
            ry: rng.random_range(16.0..28.0),
        },
        _ => {
            let length: f64 = rng.random_range(50.0..130.0);
            let width: f64 = rng.random_range(2.0..4.0);
            let turn: f64 = rng.random_range(-PI / 3.0..PI / 3.0);
            let amp: f64 = rng.random_range(1.5..4.0);
            let wavelength: f64 = rng.random_range(35.0..70.0);
            let phase: f64 = rng.random_range(0.0..TAU);
            let steps = (length / 2.0).ceil() as usize;
            let ds = length / steps as f64;
            let mut pts = Vec::with_capacity(steps + 1);
            let (mut x, mut y) = (0.0f64, 0.0f64);
            for i in 0..=steps {
                let s = i as f64 * ds;
                let heading = turn * (s / length - 0.5);
                let off = amp * (TAU * s / wavelength + phase).sin();
                pts.push(Point::new(x - off * heading.sin(), y + off * heading.cos()));
                x += ds * heading.cos();
                y += ds * heading.sin();
            }
            let n = pts.len() as f64;
            let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x / n, b + p.y / n));
            let centerline = pts.iter().map(|p| Point::new(p.x - mx, p.y - my)).collect();
            Shape::Ribbon { centerline, width }
        }
    }
}

/// Pixel occupancy with a dilation margin.
struct Occupancy {
    width: usize,
    height: usize,
    taken: Vec<bool>,
}

impl Occupancy {
    fn new((width, height): (usize, usize)) -> Self {
        Self {
            width,
            height,
            taken: vec![false; width * height],
        }
    }

    fn hits(&self, px: &[(i64, i64)]) -> bool {
        px.iter().any(|&(x, y)| {
            x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
                && self.taken[y as usize * self.width + x as usize]
        })
    }

    fn mark(&mut self, px: &[(i64, i64)]) {
        for &(x, y) in px {
            for yy in (y - GAP_PX).max(0)..=(y + GAP_PX).min(self.height as i64 - 1) {
                for xx in (x - GAP_PX).max(0)..=(x + GAP_PX).min(self.width as i64 - 1) {
                    self.taken[yy as usize * self.width + xx as usize] = true;
                }
            }
        }
    }
}

struct Placement<'a> {
    cfg: &'a SceneConfig,
    rig: AffineTransform,
    probe: SceneSpec,
    rgb_occ: Occupancy,
    hsi_occ: Occupancy,
}

impl Placement<'_> {
    /// Tries to place `shape` once; on success returns pose and jitter.
    fn attempt(&mut self, rng: &mut ChaCha8Rng, shape: &Shape, scale: f64) -> Option<(AffineTransform, AffineTransform)> {
        let cfg = self.cfg;
        let crop = cfg.rgb_crop;
        let margin = GAP_PX as f64 + 1.0;
        let (x0, x1) = (crop.x as f64 + margin, (crop.x + crop.width) as f64 - 1.0 - margin);
        let (y0, y1) = (crop.y as f64 + margin, (crop.y + crop.height) as f64 - 1.0 - margin);
        let r = shape.radius() * scale;
        if x1 - x0 < 2.0 * r || y1 - y0 < 2.0 * r {
            return None;
        }
        let cx = rng.random_range(x0 + r..=x1 - r);
        let cy = rng.random_range(y0 + r..=y1 - r);
        let theta: f64 = rng.random_range(0.0..TAU);
        let (sn, cs) = theta.sin_cos();
        let pose = AffineTransform::new(scale * cs, -scale * sn, cx, scale * sn, scale * cs, cy);
        let anchor = self.rig.apply(Point::new(cx, cy));
        let jitter = random_similarity(
            rng,
            anchor,
            cfg.jitter_translation_px,
            cfg.jitter_rotation_deg,
            cfg.jitter_scale,
        );
        let poly: Vec<Point> = shape.outline().into_iter().map(|p| pose.apply(p)).collect();
        if poly.iter().any(|p| p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1) {
            return None;
        }
        let to_hsi = jitter.compose(&self.rig);
        let (hw, hh) = (cfg.hsi_size.0 as f64, cfg.hsi_size.1 as f64);
        let inside_hsi = |p: Point| {
            let q = self.probe.project(to_hsi.apply(p));
            q.x >= margin && q.y >= margin && q.x <= hw - 1.0 - margin && q.y <= hh - 1.0 - margin
        };
        if !poly.iter().all(|&p| inside_hsi(p)) {
            return None;
        }
        let mut rgb_px = Vec::new();
        fill_polygon(&poly, cfg.rgb_size.0, cfg.rgb_size.1, |x, y| rgb_px.push((x as i64, y as i64)));
        if rgb_px.is_empty() || self.rgb_occ.hits(&rgb_px) {
            return None;
        }
        let hsi_px: Vec<(i64, i64)> = rgb_px
            .iter()
            .map(|&(x, y)| {
                let q = self.probe.project(to_hsi.apply(Point::new(x as f64, y as f64)));
                (q.x.round() as i64, q.y.round() as i64)
            })
            .collect();
        if self.hsi_occ.hits(&hsi_px) {
            return None;
        }
        self.rgb_occ.mark(&rgb_px);
        self.hsi_occ.mark(&hsi_px);
        Some((pose, jitter))
    }
}

fn draw_classes(rng: &mut ChaCha8Rng, cfg: &SceneConfig) -> Vec<u8> {
    let n = rng.random_range(cfg.min_objects..=cfg.max_objects);
    if n == 0 {
        return Vec::new();
    }
    let classes = [FILM, BASKET, CARDBOARD, VIDEO_TAPE, FILAMENT, TRASH_BAG];
    let dist = WeightedIndex::new(cfg.class_weights).expect("validated weights");
    let mut drawn: Vec<u8> = (0..n).map(|_| classes[dist.sample(rng)]).collect();
    if !drawn.iter().any(|&c| is_ribbon_class(c)) && rng.random_bool(cfg.ribbon_probability) {
        let (wt, wf) = (cfg.class_weights[3], cfg.class_weights[4]);
        let tape = if wt + wf > 0.0 {
            rng.random_bool(wt / (wt + wf))
        } else {
            rng.random_bool(0.5)
        };
        drawn.push(if tape { VIDEO_TAPE } else { FILAMENT });
    }
    // long thin ribbons are the hardest to fit, so they go first
    drawn.sort_by_key(|&c| !is_ribbon_class(c));
    drawn
}

/// Seeded random scene. Objects never overlap in either view and lie inside
/// the shared field of view; an object that cannot be placed after repeated
/// shrinking is left out.
pub fn generate_scene(seed: u64, cfg: &SceneConfig) -> Result<SceneSpec, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let crop = cfg.rgb_crop;
    let nominal = AffineTransform::frame_scaling((crop.width, crop.height), cfg.hsi_size)
        .compose(&AffineTransform::translation(-(crop.x as f64), -(crop.y as f64)));
    let hsi_center = Point::new(
        (cfg.hsi_size.0 as f64 - 1.0) / 2.0,
        (cfg.hsi_size.1 as f64 - 1.0) / 2.0,
    );
    let residual = random_similarity(
        &mut rng,
        hsi_center,
        cfg.rig_translation_px,
        cfg.rig_rotation_deg,
        cfg.rig_scale,
    );
    let rig = residual.compose(&nominal);
    let wl = wavelengths(cfg.bands, WAVELENGTH_RANGE_NM);
    let palette: BTreeMap<u8, Appearance> = (0..=6u8).map(|c| (c, appearance(c, &wl))).collect();
    let mut spec = SceneSpec {
        seed,
        rgb_size: cfg.rgb_size,
        hsi_size: cfg.hsi_size,
        rgb_crop: crop,
        wavelengths_nm: wl,
        palette,
        rig,
        projective: cfg.projective,
        objects: Vec::new(),
        background_texture: Texture::random(&mut rng),
        texture_amplitude: cfg.texture_amplitude,
        noise: NoiseLevels {
            rgb: cfg.rgb_noise,
            spectral: cfg.spectral_noise,
        },
    };
    let classes = draw_classes(&mut rng, cfg);
    let mut placement = Placement {
        cfg,
        rig,
        probe: spec.clone(),
        rgb_occ: Occupancy::new(cfg.rgb_size),
        hsi_occ: Occupancy::new(cfg.hsi_size),
    };
    for class in classes {
        let shape = random_shape(&mut rng, class);
        let texture = Texture::random(&mut rng);
        let mut placed = None;
        'outer: for step in 0..=SHRINK_STEPS {
            let scale = SHRINK_FACTOR.powi(step as i32);
            for _ in 0..PLACEMENT_ATTEMPTS {
                if let Some(p) = placement.attempt(&mut rng, &shape, scale) {
                    placed = Some(p);
                    break 'outer;
                }
            }
        }
        if let Some((pose, jitter)) = placed {
            spec.objects.push(ObjectSpec {
                instance_id: spec.objects.len() as u32 + 1,
                class_id: class,
                shape,
                pose,
                jitter,
                texture,
            });
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scene() {
        let cfg = SceneConfig::default();
        let a = generate_scene(5, &cfg).unwrap();
        assert_eq!(a, generate_scene(5, &cfg).unwrap());
        assert_ne!(a, generate_scene(6, &cfg).unwrap());
    }

    #[test]
    fn zero_objects() {
        let cfg = SceneConfig {
            min_objects: 0,
            max_objects: 0,
            ..SceneConfig::default()
        };
        assert!(generate_scene(1, &cfg).unwrap().objects.is_empty());
    }

    #[test]
    fn objects_are_placed() {
        let cfg = SceneConfig::default();
        for seed in 0..20 {
            let s = generate_scene(seed, &cfg).unwrap();
            assert!(s.objects.len() >= cfg.min_objects, "seed {seed}: {}", s.objects.len());
            for (i, o) in s.objects.iter().enumerate() {
                assert_eq!(o.instance_id as usize, i + 1);
            }
        }
    }

    #[test]
    fn ribbons_are_thin() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            if let Shape::Ribbon { width, .. } = random_shape(&mut rng, VIDEO_TAPE) {
                assert!((1.0..=4.0).contains(&width));
            } else {
                panic!("tape must be a ribbon");
            }
        }
    }

    #[test]
    fn projective_roundtrip() {
        let cfg = SceneConfig {
            projective: 4e-4,
            ..SceneConfig::default()
        };
        let s = generate_scene(2, &cfg).unwrap();
        let p = Point::new(17.0, 230.0);
        let q = s.unproject(s.project(p));
        assert!(p.distance(&q) < 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SceneConfig {
            min_objects: 5,
            max_objects: 2,
            ..SceneConfig::default()
        };
        assert!(generate_scene(0, &cfg).is_err());
        let cfg = SceneConfig {
            rgb_crop: Rect::new(100, 0, 300, 300),
            ..SceneConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
