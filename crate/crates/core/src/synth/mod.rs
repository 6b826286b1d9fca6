//! Synthetic dual-camera rig: seeded scenes of labeled objects seen by an RGB
//! camera and a hyperspectral camera whose views differ by a known affine
//! map per object.

use thiserror::Error;

use crate::imaging::ImagingError;

mod appearance;
mod dataset;
mod render;
mod scene;

pub use appearance::{
    appearance, luma, mixture_cube, wavelengths, Appearance, DEFAULT_BANDS, SPECTRAL_GAIN, WAVELENGTH_RANGE_NM,
};
pub use dataset::{read_affines, sample_id, scene_seed, split_of, write_dataset, MANIFEST_FILE};
pub use render::{annotations, render_views, Views};
pub use scene::{
    generate_scene, is_ribbon_class, NoiseLevels, ObjectSpec, SceneConfig, SceneSpec, Shape, Texture,
    DATASET_CLASS_COUNTS,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scene configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}
