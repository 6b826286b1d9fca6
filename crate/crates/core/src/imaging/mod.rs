//! Sample types, file formats and the preprocessing chain.

use std::path::PathBuf;

use thiserror::Error;

mod annotations;
mod augment;
pub mod io;
mod manifest;
mod preprocess;
mod raster;
pub mod resample;

pub use annotations::{
    fill_polygon, point_in_polygon, polygon_area, polygon_perimeter, rasterize_annotations,
    Annotation, AnnotationSet, ClassInfo, ClassTaxonomy, BASKET, CARDBOARD, FILAMENT, FILM,
    TRASH_BAG, VIDEO_TAPE,
};
pub use augment::{augment, AugmentSpec, Augmented, MAX_ROTATION_DEG};
pub use manifest::{DatasetManifest, SampleRecord, Split, MANIFEST_VERSION};
pub use preprocess::{preprocess, PreprocessConfig, Preprocessed};
pub use raster::{Cube, FloatCube, HyperCube, LabelMask, RasterImage, Rect, ValueRange};

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("empty image or cube")]
    Empty,
    #[error("data length {actual} does not match dimensions (expected {expected})")]
    DataLength { expected: usize, actual: usize },
    #[error("sample value {value} outside {range:?}")]
    ValueOutOfRange { value: f64, range: ValueRange },
    #[error("invalid wavelengths: {0}")]
    BadWavelengths(String),
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("{which} crop {crop:?} exceeds the {}x{} frame", frame.0, frame.1)]
    BadCrop {
        which: &'static str,
        crop: Rect,
        frame: (usize, usize),
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("annotation {index} has fewer than 3 distinct vertices")]
    DegeneratePolygon { index: usize },
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("invalid class taxonomy: {0}")]
    InvalidTaxonomy(String),
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("ENVI: {0}")]
    Envi(String),
    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Json { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
