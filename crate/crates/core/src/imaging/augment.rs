//! Training-style geometric augmentation applied identically to the RGB
//! image, the cube and the mask.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::raster::{FloatCube, LabelMask, RasterImage};
use super::resample::{warp_cube, warp_mask, warp_raster, Border};
use super::ImagingError;
use crate::geometry::{AffineTransform, Point};

pub const MAX_ROTATION_DEG: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub rotation_deg: f64,
    pub hflip: bool,
    pub vflip: bool,
}

impl AugmentSpec {
    pub const IDENTITY: AugmentSpec = AugmentSpec {
        rotation_deg: 0.0,
        hflip: false,
        vflip: false,
    };

    /// Uniform rotation in ±30° and independent fair-coin flips.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            rotation_deg: rng.random_range(-MAX_ROTATION_DEG..=MAX_ROTATION_DEG),
            hflip: rng.random_bool(0.5),
            vflip: rng.random_bool(0.5),
        }
    }

    /// Output→source pixel map for a `size` frame: rotation about the frame
    /// center, then flips.
    pub fn inverse_map(&self, size: (usize, usize)) -> AffineTransform {
        let (w, h) = ((size.0 - 1) as f64, (size.1 - 1) as f64);
        let center = Point::new(w / 2.0, h / 2.0);
        let forward_rot = AffineTransform::rotation_about(center, self.rotation_deg.to_radians());
        let flip = AffineTransform::new(
            if self.hflip { -1.0 } else { 1.0 },
            0.0,
            if self.hflip { w } else { 0.0 },
            0.0,
            if self.vflip { -1.0 } else { 1.0 },
            if self.vflip { h } else { 0.0 },
        );
        if self.rotation_deg == 0.0 {
            // flips are involutions; keep the map exactly integral
            return flip;
        }
        let forward = flip.compose(&forward_rot);
        forward.inverse().expect("rigid maps are invertible")
    }
}

#[derive(Clone, Debug)]
pub struct Augmented {
    pub rgb: RasterImage,
    pub cube: FloatCube,
    pub mask: LabelMask,
}

/// Applies one geometric transform to all three inputs: bilinear for the
/// image and cube, nearest-neighbor for the mask, zero/background outside
/// the source frame.
pub fn augment(
    rgb: &RasterImage,
    cube: &FloatCube,
    mask: &LabelMask,
    spec: &AugmentSpec,
) -> Result<Augmented, ImagingError> {
    let size = rgb.size();
    if cube.size() != size || mask.size() != size {
        return Err(ImagingError::ShapeMismatch(format!(
            "rgb {:?}, cube {:?}, mask {:?}",
            size,
            cube.size(),
            mask.size()
        )));
    }
    if !(-MAX_ROTATION_DEG..=MAX_ROTATION_DEG).contains(&spec.rotation_deg) {
        return Err(ImagingError::InvalidConfig(format!(
            "rotation {}° outside ±{MAX_ROTATION_DEG}°",
            spec.rotation_deg
        )));
    }
    let inv = spec.inverse_map(size);
    Ok(Augmented {
        rgb: warp_raster(rgb, &inv, None, size, Border::Zero),
        cube: warp_cube(cube, &inv, None, size, Border::Zero, 1.0),
        mask: warp_mask(mask, &inv, None, size, Border::Zero),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ValueRange;

    fn inputs(w: usize, h: usize) -> (RasterImage, FloatCube, LabelMask) {
        let rgb_data: Vec<f32> = (0..w * h * 3).map(|i| (i % 17) as f32 / 16.0).collect();
        let rgb = RasterImage::new(w, h, 3, rgb_data, ValueRange::UnitFloat).unwrap();
        let cube_data: Vec<f32> = (0..w * h * 2).map(|i| (i % 11) as f32 / 10.0).collect();
        let cube = FloatCube::new(w, h, 2, cube_data, None).unwrap();
        let mut mask = LabelMask::new(w, h);
        for y in 2..6 {
            for x in 1..w / 2 {
                mask.set(x, y, 3, 1);
            }
        }
        mask.set(w - 2, h - 2, 5, 2);
        (rgb, cube, mask)
    }

    #[test]
    fn identity_spec_is_noop() {
        let (r, c, m) = inputs(12, 9);
        let out = augment(&r, &c, &m, &AugmentSpec::IDENTITY).unwrap();
        assert_eq!(out.rgb, r);
        assert_eq!(out.cube, c);
        assert_eq!(out.mask, m);
    }

    #[test]
    fn double_hflip_is_identity() {
        let (r, c, m) = inputs(12, 9);
        let spec = AugmentSpec {
            hflip: true,
            ..AugmentSpec::IDENTITY
        };
        let once = augment(&r, &c, &m, &spec).unwrap();
        assert_ne!(once.mask, m);
        let twice = augment(&once.rgb, &once.cube, &once.mask, &spec).unwrap();
        assert_eq!(twice.rgb, r);
        assert_eq!(twice.cube, c);
        assert_eq!(twice.mask, m);
    }

    #[test]
    fn rotation_introduces_no_new_labels() {
        let (r, c, m) = inputs(32, 32);
        let spec = AugmentSpec {
            rotation_deg: 30.0,
            ..AugmentSpec::IDENTITY
        };
        let out = augment(&r, &c, &m, &spec).unwrap();
        assert!(out.mask.labels().is_subset(&m.labels()));
    }

    #[test]
    fn rejects_large_rotation_and_mismatch() {
        let (r, c, m) = inputs(8, 8);
        let spec = AugmentSpec {
            rotation_deg: 45.0,
            ..AugmentSpec::IDENTITY
        };
        assert!(augment(&r, &c, &m, &spec).is_err());
        let small = LabelMask::new(4, 4);
        assert!(matches!(
            augment(&r, &c, &small, &AugmentSpec::IDENTITY),
            Err(ImagingError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn random_spec_is_seeded_and_bounded() {
        for seed in 0..50 {
            let s = AugmentSpec::random(seed);
            assert_eq!(s, AugmentSpec::random(seed));
            assert!(s.rotation_deg.abs() <= MAX_ROTATION_DEG);
        }
    }
}
