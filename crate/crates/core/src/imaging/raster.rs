use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ImagingError;

/// Numeric range of the samples stored in a [`RasterImage`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueRange {
    /// Integer values in `0..=255`.
    U8,
    /// Integer values in `0..=65535`.
    U16,
    /// Real values in `[0, 1]`.
    UnitFloat,
}

impl ValueRange {
    pub fn max_value(self) -> f32 {
        match self {
            ValueRange::U8 => 255.0,
            ValueRange::U16 => 65535.0,
            ValueRange::UnitFloat => 1.0,
        }
    }

    fn admits(self, v: f32) -> bool {
        if !(0.0..=self.max_value()).contains(&v) {
            return false;
        }
        match self {
            ValueRange::UnitFloat => true,
            _ => v.fract() == 0.0,
        }
    }
}

/// Axis-aligned pixel rectangle, `x`/`y` being the top-left pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self::new(0, 0, width, height)
    }

    /// True when the rectangle is nonempty and lies inside a `width`×`height` frame.
    pub fn fits_within(&self, width: usize, height: usize) -> bool {
        self.width > 0
            && self.height > 0
            && self.x.checked_add(self.width).is_some_and(|r| r <= width)
            && self.y.checked_add(self.height).is_some_and(|b| b <= height)
    }
}

/// Row-major, channel-interleaved 2-D raster. Samples are kept as `f32`
/// regardless of their nominal range; `range` records what they mean.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
    range: ValueRange,
}

impl RasterImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f32>,
        range: ValueRange,
    ) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(ImagingError::Empty);
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(ImagingError::DataLength {
                expected,
                actual: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|v| !range.admits(**v)) {
            return Err(ImagingError::ValueOutOfRange {
                value: f64::from(*bad),
                range,
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
            range,
        })
    }

    pub fn zeros(width: usize, height: usize, channels: usize, range: ValueRange) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
            range,
        }
    }

    pub fn from_u8(width: usize, height: usize, channels: usize, data: &[u8]) -> Result<Self, ImagingError> {
        Self::new(
            width,
            height,
            channels,
            data.iter().map(|&v| f32::from(v)).collect(),
            ValueRange::U8,
        )
    }

    /// Builds an image without checking the value range. Used internally by
    /// resamplers whose outputs are convex combinations of valid inputs.
    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f32>,
        range: ValueRange,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
            range,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn range(&self) -> ValueRange {
        self.range
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Sets one sample. The caller is responsible for keeping it inside `range`.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Single-channel intensity in `[0, 1]`: Rec.601 luma for images with at
    /// least three channels, channel mean otherwise.
    pub fn to_gray(&self) -> RasterImage {
        let scale = 1.0 / self.range.max_value();
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| {
                let v = if self.channels >= 3 {
                    0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]
                } else {
                    px.iter().sum::<f32>() / self.channels as f32
                };
                (v * scale).clamp(0.0, 1.0)
            })
            .collect();
        RasterImage::from_parts_unchecked(self.width, self.height, 1, data, ValueRange::UnitFloat)
    }

    /// Divides every sample by `divisor` and clamps into `[0, 1]`.
    pub fn normalized(&self, divisor: f32) -> RasterImage {
        let data = self
            .data
            .iter()
            .map(|v| (v / divisor).clamp(0.0, 1.0))
            .collect();
        RasterImage::from_parts_unchecked(
            self.width,
            self.height,
            self.channels,
            data,
            ValueRange::UnitFloat,
        )
    }

    /// Quantizes to 8-bit samples (rounding), whatever the current range.
    pub fn to_u8_samples(&self) -> Vec<u8> {
        let scale = 255.0 / self.range.max_value();
        self.data
            .iter()
            .map(|v| (v * scale).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

/// Read access to a hyperspectral cube, independent of sample type.
///
/// Pixels are addressed by their row-major index `y * width + x`.
pub trait Cube: Sync {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn bands(&self) -> usize;
    fn value(&self, pixel: usize, band: usize) -> f64;
    fn wavelengths_nm(&self) -> Option<&[f64]>;

    fn pixel_count(&self) -> usize {
        self.width() * self.height()
    }

    fn spectrum_into(&self, pixel: usize, out: &mut [f64]) {
        for (b, o) in out.iter_mut().enumerate() {
            *o = self.value(pixel, b);
        }
    }
}

fn check_cube_shape(
    width: usize,
    height: usize,
    bands: usize,
    len: usize,
    wavelengths: Option<&[f64]>,
) -> Result<(), ImagingError> {
    if width == 0 || height == 0 || bands == 0 {
        return Err(ImagingError::Empty);
    }
    let expected = width * height * bands;
    if len != expected {
        return Err(ImagingError::DataLength {
            expected,
            actual: len,
        });
    }
    if let Some(w) = wavelengths {
        if w.len() != bands {
            return Err(ImagingError::BadWavelengths(format!(
                "{} wavelengths for {} bands",
                w.len(),
                bands
            )));
        }
        if w.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(ImagingError::BadWavelengths(
                "wavelengths must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// 16-bit hyperspectral cube, band-sequential: `data[band][y][x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperCube {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<u16>,
    wavelengths_nm: Option<Vec<f64>>,
}

impl HyperCube {
    pub fn new(
        width: usize,
        height: usize,
        bands: usize,
        data: Vec<u16>,
        wavelengths_nm: Option<Vec<f64>>,
    ) -> Result<Self, ImagingError> {
        check_cube_shape(width, height, bands, data.len(), wavelengths_nm.as_deref())?;
        Ok(Self {
            width,
            height,
            bands,
            data,
            wavelengths_nm,
        })
    }

    pub fn band(&self, b: usize) -> &[u16] {
        let n = self.width * self.height;
        &self.data[b * n..(b + 1) * n]
    }

    pub fn get(&self, x: usize, y: usize, b: usize) -> u16 {
        self.data[b * self.width * self.height + y * self.width + x]
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn to_float(&self, divisor: f64) -> FloatCube {
        FloatCube {
            width: self.width,
            height: self.height,
            bands: self.bands,
            data: self
                .data
                .iter()
                .map(|&v| (f64::from(v) / divisor) as f32)
                .collect(),
            wavelengths_nm: self.wavelengths_nm.clone(),
        }
    }
}

impl Cube for HyperCube {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn bands(&self) -> usize {
        self.bands
    }
    #[inline]
    fn value(&self, pixel: usize, band: usize) -> f64 {
        f64::from(self.data[band * self.width * self.height + pixel])
    }
    fn wavelengths_nm(&self) -> Option<&[f64]> {
        self.wavelengths_nm.as_deref()
    }
}

/// Floating-point cube (normalized data, PCA outputs), band-sequential.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatCube {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<f32>,
    wavelengths_nm: Option<Vec<f64>>,
}

impl FloatCube {
    pub fn new(
        width: usize,
        height: usize,
        bands: usize,
        data: Vec<f32>,
        wavelengths_nm: Option<Vec<f64>>,
    ) -> Result<Self, ImagingError> {
        check_cube_shape(width, height, bands, data.len(), wavelengths_nm.as_deref())?;
        Ok(Self {
            width,
            height,
            bands,
            data,
            wavelengths_nm,
        })
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        bands: usize,
        data: Vec<f32>,
        wavelengths_nm: Option<Vec<f64>>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * bands);
        Self {
            width,
            height,
            bands,
            data,
            wavelengths_nm,
        }
    }

    pub fn band(&self, b: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[b * n..(b + 1) * n]
    }

    pub fn get(&self, x: usize, y: usize, b: usize) -> f32 {
        self.data[b * self.width * self.height + y * self.width + x]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

impl Cube for FloatCube {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn bands(&self) -> usize {
        self.bands
    }
    #[inline]
    fn value(&self, pixel: usize, band: usize) -> f64 {
        f64::from(self.data[band * self.width * self.height + pixel])
    }
    fn wavelengths_nm(&self) -> Option<&[f64]> {
        self.wavelengths_nm.as_deref()
    }
}

/// Per-pixel class IDs (0 = background) with a parallel instance channel
/// (0 = no instance).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    class_ids: Vec<u8>,
    instance_ids: Vec<u32>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            class_ids: vec![0; width * height],
            instance_ids: vec![0; width * height],
        }
    }

    pub fn from_parts(
        width: usize,
        height: usize,
        class_ids: Vec<u8>,
        instance_ids: Option<Vec<u32>>,
    ) -> Result<Self, ImagingError> {
        let n = width * height;
        if class_ids.len() != n {
            return Err(ImagingError::DataLength {
                expected: n,
                actual: class_ids.len(),
            });
        }
        let instance_ids = instance_ids.unwrap_or_else(|| vec![0; n]);
        if instance_ids.len() != n {
            return Err(ImagingError::DataLength {
                expected: n,
                actual: instance_ids.len(),
            });
        }
        if let Some(i) = (0..n).find(|&i| instance_ids[i] > 0 && class_ids[i] == 0) {
            return Err(ImagingError::InvalidMask(format!(
                "pixel {i} has instance {} but no class",
                instance_ids[i]
            )));
        }
        Ok(Self {
            width,
            height,
            class_ids,
            instance_ids,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn class_ids(&self) -> &[u8] {
        &self.class_ids
    }

    pub fn instance_ids(&self) -> &[u32] {
        &self.instance_ids
    }

    #[inline]
    pub fn class_at(&self, x: usize, y: usize) -> u8 {
        self.class_ids[y * self.width + x]
    }

    #[inline]
    pub fn instance_at(&self, x: usize, y: usize) -> u32 {
        self.instance_ids[y * self.width + x]
    }

    /// Writes a label. An instance without a class is stored as background.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, class_id: u8, instance_id: u32) {
        let i = y * self.width + x;
        self.class_ids[i] = class_id;
        self.instance_ids[i] = if class_id == 0 { 0 } else { instance_id };
    }

    /// Distinct class IDs present, background included when present.
    pub fn labels(&self) -> BTreeSet<u8> {
        self.class_ids.iter().copied().collect()
    }

    pub fn foreground_count(&self) -> usize {
        self.class_ids.iter().filter(|&&c| c != 0).count()
    }

    pub fn max_class(&self) -> u8 {
        self.class_ids.iter().copied().max().unwrap_or(0)
    }
}
