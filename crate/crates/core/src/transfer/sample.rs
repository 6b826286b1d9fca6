//! Builds transfer inputs from a raw RGB + cube sample.

use std::collections::BTreeMap;

use crate::geometry::AffineTransform;
use crate::imaging::resample::{resize_mask, resize_raster};
use crate::imaging::{Cube, ImagingError, LabelMask, RasterImage, Rect};
use crate::matching::OracleMatcher;
use crate::spectral::{hsi_projection, PcaModel, Projection, SpectralError};

/// Source view, its mask and the target rendering of one sample.
#[derive(Clone, Debug)]
pub struct SampleViews {
    /// RGB restricted to the shared field of view.
    pub source: RasterImage,
    pub mask: LabelMask,
    /// Single-channel rendering of the cube.
    pub target: RasterImage,
    /// Region of the full RGB frame that `source` covers.
    pub crop: Rect,
}

impl SampleViews {
    /// Re-expresses full-RGB-frame → target maps in the cropped source frame.
    pub fn crop_affines(&self, affines: &BTreeMap<u32, AffineTransform>) -> BTreeMap<u32, AffineTransform> {
        let shift = AffineTransform::translation(self.crop.x as f64, self.crop.y as f64);
        affines.iter().map(|(&id, a)| (id, a.compose(&shift))).collect()
    }

    /// Matcher that answers with the given per-instance maps (full RGB frame
    /// → target), as queried by [`super::transfer_mask`].
    pub fn oracle(&self, affines: &BTreeMap<u32, AffineTransform>) -> OracleMatcher {
        OracleMatcher::per_region(&self.mask, self.crop_affines(affines))
            .with_query_frame(AffineTransform::frame_scaling(self.target.size(), self.source.size()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Crops the RGB image and its mask to `crop` (whole frame by default) and
/// renders the cube with `projection`.
pub fn prepare_sample<C: Cube>(
    rgb: &RasterImage,
    mask: &LabelMask,
    cube: &C,
    crop: Option<Rect>,
    projection: Projection,
    model: Option<&PcaModel>,
) -> Result<SampleViews, SampleError> {
    if mask.size() != rgb.size() {
        return Err(ImagingError::ShapeMismatch(format!(
            "mask is {:?} but the RGB image is {:?}",
            mask.size(),
            rgb.size()
        ))
        .into());
    }
    let crop = crop.unwrap_or(Rect::full(rgb.width(), rgb.height()));
    if !crop.fits_within(rgb.width(), rgb.height()) {
        return Err(ImagingError::BadCrop {
            which: "rgb",
            crop,
            frame: rgb.size(),
        }
        .into());
    }
    let out = (crop.width, crop.height);
    Ok(SampleViews {
        source: resize_raster(rgb, Some(crop), out),
        mask: resize_mask(mask, Some(crop), out),
        target: hsi_projection(cube, projection, model)?,
        crop,
    })
}
