use serde::{Deserialize, Serialize};

use super::{PcaModel, SpectralError};
use crate::imaging::{Cube, RasterImage, ValueRange};

/// Min-max stretch to `[0, 1]`. A constant input maps to all zeros.
pub fn stretch(values: &[f64]) -> Vec<f32> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| ((v - lo) / span) as f32).collect()
}

/// Three-band composite with every channel stretched independently.
pub fn false_color<C: Cube>(cube: &C, bands: [usize; 3]) -> Result<RasterImage, SpectralError> {
    for &b in &bands {
        if b >= cube.bands() {
            return Err(SpectralError::BandIndex {
                index: b,
                bands: cube.bands(),
            });
        }
    }
    let n = cube.pixel_count();
    let channels: Vec<Vec<f32>> = bands
        .iter()
        .map(|&b| stretch(&(0..n).map(|p| cube.value(p, b)).collect::<Vec<_>>()))
        .collect();
    let mut data = Vec::with_capacity(n * 3);
    for p in 0..n {
        data.extend(channels.iter().map(|c| c[p]));
    }
    Ok(RasterImage::new(cube.width(), cube.height(), 3, data, ValueRange::UnitFloat)?)
}

/// How a cube is reduced to the single channel used for matching.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Mean over bands, stretched to `[0, 1]`.
    #[default]
    Mean,
    /// First principal component of the given model, stretched to `[0, 1]`.
    FirstComponent,
}

/// Single-channel rendering of a cube. `model` is required for
/// [`Projection::FirstComponent`].
pub fn hsi_projection<C: Cube>(
    cube: &C,
    projection: Projection,
    model: Option<&PcaModel>,
) -> Result<RasterImage, SpectralError> {
    let n = cube.pixel_count();
    let bands = cube.bands();
    let values: Vec<f64> = match projection {
        Projection::Mean => (0..n)
            .map(|p| (0..bands).map(|b| cube.value(p, b)).sum::<f64>() / bands as f64)
            .collect(),
        Projection::FirstComponent => {
            let model = model.ok_or_else(|| {
                SpectralError::InvalidModel("first-component projection needs a PCA model".into())
            })?;
            if model.source_band_count != bands {
                return Err(SpectralError::ShapeMismatch {
                    expected: model.source_band_count,
                    actual: bands,
                });
            }
            let axis = &model.components[0];
            (0..n)
                .map(|p| {
                    (0..bands)
                        .map(|b| axis[b] * (cube.value(p, b) - model.mean[b]))
                        .sum()
                })
                .collect()
        }
    };
    Ok(RasterImage::new(cube.width(), cube.height(), 1, stretch(&values), ValueRange::UnitFloat)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::FloatCube;

    fn cube() -> FloatCube {
        // band 0 constant, band 1 ramp, band 2 reversed ramp
        let mut d = vec![0.5f32; 4];
        d.extend([0.0, 0.25, 0.5, 0.75]);
        d.extend([0.75, 0.5, 0.25, 0.0]);
        FloatCube::new(2, 2, 3, d, None).unwrap()
    }

    #[test]
    fn constant_band_is_zero() {
        let img = false_color(&cube(), [0, 0, 0]).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stretched_channels() {
        let img = false_color(&cube(), [1, 2, 1]).unwrap();
        assert_eq!(img.pixel(0, 0), &[0.0, 1.0, 0.0]);
        assert_eq!(img.pixel(1, 1), &[1.0, 0.0, 1.0]);
        assert!(false_color(&cube(), [0, 1, 3]).is_err());
    }

    #[test]
    fn mean_projection() {
        let img = hsi_projection(&cube(), Projection::Mean, None).unwrap();
        // band mean is constant here
        assert!(img.data().iter().all(|&v| v == 0.0));
        assert!(hsi_projection(&cube(), Projection::FirstComponent, None).is_err());
    }
}
