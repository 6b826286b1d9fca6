use crate::imaging::resample::resize_mask;
use crate::imaging::{ImagingError, LabelMask, Rect};

/// Crop+resize only: the mask region `crop` (whole frame by default) is
/// stretched onto the target frame with nearest-neighbor sampling.
pub fn manual_alignment(
    mask: &LabelMask,
    crop: Option<Rect>,
    target_size: (usize, usize),
) -> Result<LabelMask, ImagingError> {
    let crop = crop.unwrap_or(Rect::full(mask.width(), mask.height()));
    if !crop.fits_within(mask.width(), mask.height()) {
        return Err(ImagingError::BadCrop {
            which: "mask",
            crop,
            frame: mask.size(),
        });
    }
    Ok(resize_mask(mask, Some(crop), target_size))
}
