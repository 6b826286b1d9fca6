//! Spectral-dimension reduction and visualization.

use thiserror::Error;

use crate::imaging::ImagingError;

mod pca;
mod render;

pub use pca::{
    pca_apply, pca_fit, pca_fit_cubes, sample_spectra, PcaFitConfig, PcaModel, PCA_MODEL_VERSION,
};
pub use render::{false_color, hsi_projection, stretch, Projection};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("cannot keep {k} components of {bands}-band data")]
    BadRank { k: usize, bands: usize },
    #[error("band count {actual} does not match the expected {expected}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("band index {index} out of range for {bands} bands")]
    BandIndex { index: usize, bands: usize },
    #[error("unsupported PCA model version {0}")]
    UnsupportedVersion(u32),
    #[error("invalid PCA model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}
