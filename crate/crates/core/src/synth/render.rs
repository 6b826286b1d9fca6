//! Renders the RGB view, the hyperspectral cube and both ground-truth masks
//! of a scene.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::scene::{ObjectSpec, SceneSpec};
use crate::geometry::{warp_component, AffineTransform, Component, Point};
use crate::imaging::{
    fill_polygon, AnnotationSet, ClassTaxonomy, HyperCube, LabelMask, RasterImage, ValueRange,
};
use crate::transfer::{combine_layers, Layer, TransferConfig};

/// Both views of a scene with their ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Views {
    pub rgb: RasterImage,
    pub cube: HyperCube,
    pub gt_mask_rgb: LabelMask,
    pub gt_mask_hsi: LabelMask,
    /// RGB frame → hyperspectral frame per instance id.
    pub gt_affines: BTreeMap<u32, AffineTransform>,
    pub annotations: AnnotationSet,
}

/// Draws the annotation polygons in object order.
pub fn annotations(scene: &SceneSpec) -> AnnotationSet {
    let taxonomy = ClassTaxonomy::default();
    let mut ann = AnnotationSet::new(scene.rgb_size.0, scene.rgb_size.1);
    for o in &scene.objects {
        let name = taxonomy.name_of(o.class_id).unwrap_or("unknown");
        ann.push(name, o.instance_id, o.polygon());
    }
    ann
}

fn rgb_mask(scene: &SceneSpec) -> LabelMask {
    let (w, h) = scene.rgb_size;
    let mut mask = LabelMask::new(w, h);
    for o in &scene.objects {
        fill_polygon(&o.polygon(), w, h, |x, y| mask.set(x, y, o.class_id, o.instance_id));
    }
    mask
}

fn instance_pixels(mask: &LabelMask, id: u32) -> Vec<(usize, usize)> {
    let w = mask.width();
    mask.instance_ids()
        .iter()
        .enumerate()
        .filter(|(_, &i)| i == id)
        .map(|(k, _)| (k % w, k / w))
        .collect()
}

/// Inverse nearest-neighbor warp through an arbitrary output→source map.
fn warp_pixels(c: &Component, size: (usize, usize), inverse: impl Fn(Point) -> Point) -> Vec<(usize, usize)> {
    let bitmap = c.bitmap();
    let mut out = Vec::new();
    for y in 0..size.1 {
        for x in 0..size.0 {
            let s = inverse(Point::new(x as f64, y as f64));
            let (sx, sy) = ((s.x + 0.5).floor(), (s.y + 0.5).floor());
            if sx.is_finite() && sy.is_finite() && bitmap.get(sx as i64, sy as i64) {
                out.push((x, y));
            }
        }
    }
    out
}

fn hsi_mask(scene: &SceneSpec, gt_rgb: &LabelMask) -> LabelMask {
    let layers: Vec<Layer> = scene
        .objects
        .par_iter()
        .map(|o| {
            let pixels = instance_pixels(gt_rgb, o.instance_id);
            if pixels.is_empty() {
                return Layer {
                    class_id: o.class_id,
                    instance_id: o.instance_id,
                    pixels,
                };
            }
            let comp = Component::from_pixels(o.class_id, o.instance_id, pixels);
            let a = scene.object_affine(o);
            let pixels = if scene.projective == 0.0 {
                warp_component(&comp, &a, scene.hsi_size)
                    .map(|m| m.pixels())
                    .unwrap_or_default()
            } else {
                match a.inverse() {
                    Some(inv) => warp_pixels(&comp, scene.hsi_size, |p| inv.apply(scene.unproject(p))),
                    None => Vec::new(),
                }
            };
            Layer {
                class_id: o.class_id,
                instance_id: o.instance_id,
                pixels,
            }
        })
        .collect();
    let priority = TransferConfig::default().class_priority;
    combine_layers(&layers, scene.hsi_size, &priority).0
}

/// Per-object inverse maps, indexed by instance id.
struct Inverses {
    pose: Vec<AffineTransform>,
    hsi: Vec<AffineTransform>,
}

impl Inverses {
    fn new(scene: &SceneSpec) -> Self {
        let max_id = scene.objects.iter().map(|o| o.instance_id).max().unwrap_or(0) as usize;
        let mut pose = vec![AffineTransform::identity(); max_id + 1];
        let mut hsi = vec![AffineTransform::identity(); max_id + 1];
        for o in &scene.objects {
            let id = o.instance_id as usize;
            pose[id] = o.pose.inverse().unwrap_or_default();
            hsi[id] = scene.object_affine(o).inverse().unwrap_or_default();
        }
        Self { pose, hsi }
    }
}

fn object_index(scene: &SceneSpec) -> Vec<Option<&ObjectSpec>> {
    let max_id = scene.objects.iter().map(|o| o.instance_id).max().unwrap_or(0) as usize;
    let mut idx = vec![None; max_id + 1];
    for o in &scene.objects {
        idx[o.instance_id as usize] = Some(o);
    }
    idx
}

fn noise_rng(seed: u64, salt: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(row as u64);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    } else {
        0.0
    }
}

const RGB_SALT: u64 = 0x5247_4200;
const HSI_SALT: u64 = 0x4853_4900;

fn render_rgb(scene: &SceneSpec, gt: &LabelMask) -> RasterImage {
    let (w, h) = scene.rgb_size;
    let inv = Inverses::new(scene);
    let objects = object_index(scene);
    let amp = scene.texture_amplitude;
    let sigma = scene.noise.rgb;
    let rows: Vec<Vec<f32>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut rng = noise_rng(scene.seed, RGB_SALT, y);
            let mut row = Vec::with_capacity(w * 3);
            for x in 0..w {
                let p = Point::new(x as f64, y as f64);
                let id = gt.instance_at(x, y) as usize;
                let (color, t) = match objects.get(id).copied().flatten() {
                    Some(o) if id > 0 => (scene.palette[&o.class_id].rgb, o.texture.eval(inv.pose[id].apply(p))),
                    _ => (scene.palette[&0].rgb, scene.background_texture.eval(p)),
                };
                for c in color {
                    let n = gaussian(&mut rng, sigma);
                    let v = (c * (1.0 + amp * t) + n).clamp(0.0, 1.0);
                    row.push((v * 255.0).round() as f32);
                }
            }
            row
        })
        .collect();
    RasterImage::new(w, h, 3, rows.concat(), ValueRange::U8).expect("values quantized to u8")
}

fn render_cube(scene: &SceneSpec, gt: &LabelMask) -> HyperCube {
    let (w, h) = scene.hsi_size;
    let bands = scene.wavelengths_nm.len();
    let inv = Inverses::new(scene);
    let objects = object_index(scene);
    let rig_inv = scene.rig.inverse().unwrap_or_default();
    let amp = scene.texture_amplitude;
    let sigma = scene.noise.spectral;
    // each row: band-major run of w samples per band
    let rows: Vec<Vec<u16>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut rng = noise_rng(scene.seed, HSI_SALT, y);
            let mut row = vec![0u16; bands * w];
            for x in 0..w {
                let q = scene.unproject(Point::new(x as f64, y as f64));
                let id = gt.instance_at(x, y) as usize;
                let (spectrum, t) = match objects.get(id).copied().flatten() {
                    Some(o) if id > 0 => (
                        &scene.palette[&o.class_id].spectrum,
                        o.texture.eval(inv.pose[id].apply(inv.hsi[id].apply(q))),
                    ),
                    _ => (
                        &scene.palette[&0].spectrum,
                        scene.background_texture.eval(rig_inv.apply(q)),
                    ),
                };
                let gain = 1.0 + amp * t;
                for (b, s) in spectrum.iter().enumerate() {
                    let n = gaussian(&mut rng, sigma);
                    let v = (s * gain + n).clamp(0.0, 1.0);
                    row[b * w + x] = (v * 65535.0).round() as u16;
                }
            }
            row
        })
        .collect();
    let n = w * h;
    let mut data = vec![0u16; bands * n];
    for (y, row) in rows.iter().enumerate() {
        for b in 0..bands {
            data[b * n + y * w..b * n + (y + 1) * w].copy_from_slice(&row[b * w..(b + 1) * w]);
        }
    }
    HyperCube::new(w, h, bands, data, Some(scene.wavelengths_nm.clone())).expect("consistent cube shape")
}

/// Renders both views. A pure function of the scene: noise streams are
/// seeded from `scene.seed`.
pub fn render_views(scene: &SceneSpec) -> Views {
    let gt_mask_rgb = rgb_mask(scene);
    let gt_mask_hsi = hsi_mask(scene, &gt_mask_rgb);
    let rgb = render_rgb(scene, &gt_mask_rgb);
    let cube = render_cube(scene, &gt_mask_hsi);
    let gt_affines = scene
        .objects
        .iter()
        .map(|o| (o.instance_id, scene.object_affine(o)))
        .collect();
    Views {
        rgb,
        cube,
        gt_mask_rgb,
        gt_mask_hsi,
        gt_affines,
        annotations: annotations(scene),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::rasterize_annotations;
    use crate::synth::{generate_scene, SceneConfig};

    fn small_cfg() -> SceneConfig {
        SceneConfig {
            bands: 16,
            ..SceneConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let s = generate_scene(9, &small_cfg()).unwrap();
        assert_eq!(render_views(&s), render_views(&s));
    }

    #[test]
    fn aligned_rig_gives_identical_masks() {
        let cfg = SceneConfig {
            bands: 8,
            ..SceneConfig::aligned()
        };
        let s = generate_scene(4, &cfg).unwrap();
        let v = render_views(&s);
        assert!(v.gt_mask_rgb.foreground_count() > 0);
        assert_eq!(v.gt_mask_rgb, v.gt_mask_hsi);
    }

    #[test]
    fn rgb_mask_matches_annotations() {
        let s = generate_scene(11, &small_cfg()).unwrap();
        let v = render_views(&s);
        let m = rasterize_annotations(&v.annotations, &ClassTaxonomy::default(), s.rgb_size, s.rgb_size).unwrap();
        assert_eq!(m, v.gt_mask_rgb);
    }

    #[test]
    fn hsi_mask_is_the_warped_rgb_mask() {
        let s = generate_scene(12, &small_cfg()).unwrap();
        let v = render_views(&s);
        for o in &s.objects {
            let px = instance_pixels(&v.gt_mask_rgb, o.instance_id);
            let comp = Component::from_pixels(o.class_id, o.instance_id, px);
            let warped = warp_component(&comp, &v.gt_affines[&o.instance_id], s.hsi_size).unwrap();
            assert_eq!(warped.pixels(), instance_pixels(&v.gt_mask_hsi, o.instance_id));
        }
    }

    #[test]
    fn projective_mode_still_covers_objects() {
        let cfg = SceneConfig {
            bands: 4,
            projective: 5e-4,
            ..SceneConfig::default()
        };
        let s = generate_scene(3, &cfg).unwrap();
        let v = render_views(&s);
        for o in &s.objects {
            assert!(!instance_pixels(&v.gt_mask_hsi, o.instance_id).is_empty());
        }
    }
}
