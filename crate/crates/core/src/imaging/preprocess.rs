use serde::{Deserialize, Serialize};

use super::raster::{Cube, FloatCube, LabelMask, RasterImage, Rect};
use super::resample::{resize_cube, resize_mask, resize_raster};
use super::ImagingError;

/// Field-of-view crops and output geometry shared by both sensors.
///
/// Crops default to the full frame: the rectangles that align the two
/// sensors' fields of view are rig-specific and come from the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub rgb_crop: Option<Rect>,
    pub cube_crop: Option<Rect>,
    pub target_size: (usize, usize),
    pub rgb_norm_divisor: f32,
    pub cube_norm_divisor: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            rgb_crop: None,
            cube_crop: None,
            target_size: (256, 256),
            rgb_norm_divisor: 255.0,
            cube_norm_divisor: 65535.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub rgb: RasterImage,
    pub cube: FloatCube,
    pub mask: Option<LabelMask>,
}

fn checked_crop(crop: Option<Rect>, size: (usize, usize), which: &'static str) -> Result<Rect, ImagingError> {
    let r = crop.unwrap_or(Rect::full(size.0, size.1));
    if !r.fits_within(size.0, size.1) {
        return Err(ImagingError::BadCrop {
            which,
            crop: r,
            frame: size,
        });
    }
    Ok(r)
}

/// Crops each modality to the shared field of view, resizes to
/// `cfg.target_size` (bilinear for images, nearest-neighbor for the mask)
/// and scales image samples into `[0, 1]`.
///
/// The mask, when given, must be registered to the RGB frame and follows the
/// RGB crop.
pub fn preprocess<C: Cube>(
    rgb: &RasterImage,
    cube: &C,
    mask: Option<&LabelMask>,
    cfg: &PreprocessConfig,
) -> Result<Preprocessed, ImagingError> {
    let target = cfg.target_size;
    if target.0 == 0 || target.1 == 0 {
        return Err(ImagingError::InvalidConfig("target size must be positive".into()));
    }
    if !(cfg.rgb_norm_divisor > 0.0 && cfg.cube_norm_divisor > 0.0) {
        return Err(ImagingError::InvalidConfig("normalization divisors must be positive".into()));
    }
    if cube.pixel_count() == 0 || cube.bands() == 0 {
        return Err(ImagingError::Empty);
    }
    let rgb_crop = checked_crop(cfg.rgb_crop, rgb.size(), "rgb")?;
    let cube_crop = checked_crop(cfg.cube_crop, (cube.width(), cube.height()), "cube")?;
    if let Some(m) = mask {
        if m.size() != rgb.size() {
            return Err(ImagingError::ShapeMismatch(format!(
                "mask is {}x{}, RGB image is {}x{}",
                m.width(),
                m.height(),
                rgb.width(),
                rgb.height()
            )));
        }
    }
    let rgb_out = resize_raster(&rgb.normalized(cfg.rgb_norm_divisor), Some(rgb_crop), target);
    let cube_out = resize_cube(cube, Some(cube_crop), target, cfg.cube_norm_divisor);
    let mask_out = mask.map(|m| resize_mask(m, Some(rgb_crop), target));
    Ok(Preprocessed {
        rgb: rgb_out,
        cube: cube_out,
        mask: mask_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{HyperCube, ValueRange};

    fn rgb(w: usize, h: usize) -> RasterImage {
        let data: Vec<u8> = (0..w * h * 3).map(|i| (i * 7 % 256) as u8).collect();
        RasterImage::from_u8(w, h, 3, &data).unwrap()
    }

    fn cube(w: usize, h: usize, b: usize) -> HyperCube {
        let data = (0..w * h * b).map(|i| (i * 131 % 65536) as u16).collect();
        HyperCube::new(w, h, b, data, None).unwrap()
    }

    #[test]
    fn identity_config_is_plain_normalization() {
        let (r, c) = (rgb(9, 5), cube(9, 5, 4));
        let cfg = PreprocessConfig {
            target_size: (9, 5),
            ..Default::default()
        };
        let out = preprocess(&r, &c, None, &cfg).unwrap();
        assert_eq!(out.rgb, r.normalized(255.0));
        assert_eq!(out.cube, c.to_float(65535.0));
        assert_eq!(out.rgb.range(), ValueRange::UnitFloat);
    }

    #[test]
    fn outputs_reach_target_size() {
        let (r, c) = (rgb(40, 30), cube(20, 16, 3));
        let mut m = LabelMask::new(40, 30);
        m.set(3, 3, 2, 1);
        let out = preprocess(&r, &c, Some(&m), &PreprocessConfig {
            target_size: (16, 12),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(out.rgb.size(), (16, 12));
        assert_eq!(out.cube.size(), (16, 12));
        assert_eq!(out.mask.unwrap().size(), (16, 12));
        assert!(out.rgb.data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(out.cube.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn crop_out_of_bounds() {
        let cfg = PreprocessConfig {
            rgb_crop: Some(Rect::new(5, 0, 10, 4)),
            ..Default::default()
        };
        let err = preprocess(&rgb(12, 4), &cube(4, 4, 2), None, &cfg).unwrap_err();
        assert!(matches!(err, ImagingError::BadCrop { which: "rgb", .. }));
    }

    #[test]
    fn mask_shape_mismatch() {
        let m = LabelMask::new(3, 3);
        let err = preprocess(&rgb(4, 4), &cube(4, 4, 2), Some(&m), &PreprocessConfig::default()).unwrap_err();
        assert!(matches!(err, ImagingError::ShapeMismatch(_)));
    }

    #[test]
    fn crop_selects_region() {
        let r = rgb(8, 8);
        let cfg = PreprocessConfig {
            rgb_crop: Some(Rect::new(2, 2, 4, 4)),
            target_size: (4, 4),
            ..Default::default()
        };
        let out = preprocess(&r, &cube(4, 4, 1), None, &cfg).unwrap();
        assert_eq!(out.rgb.get(0, 0, 1), r.get(2, 2, 1) / 255.0);
    }
}
