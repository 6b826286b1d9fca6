//! Multimodal (RGB + hyperspectral) sample handling and automatic label transfer.
//!
//! The crate is organised along the processing chain:
//!
//! 1. [`imaging`] – raster, cube and mask types, file formats, preprocessing,
//!    polygon rasterization and augmentation.
//! 2. [`spectral`] – PCA reduction of the spectral dimension and false-color
//!    rendering.
//! 3. [`geometry`] – connected components, Moore boundary tracing, control-point
//!    sampling, affine fitting and warping.
//! 4. [`matching`] – the point-correspondence provider contract with a built-in
//!    coarse-to-fine NCC matcher, a file-backed matcher and an oracle.
//! 5. [`transfer`] – per-component label transfer from the RGB frame into the
//!    hyperspectral frame, plus the crop+resize baseline.
//! 6. [`metrics`] – per-class IoU, mIoU, median-frequency weights, dataset
//!    evaluation reports.
//! 7. [`synth`] – a synthetic dual-camera rig with exact ground truth.

pub mod geometry;
pub mod imaging;
pub mod matching;
pub mod metrics;
pub mod spectral;
pub mod synth;
pub mod transfer;

mod error;

pub use error::{Error, Result};
pub use geometry::{AffineTransform, Point};
pub use imaging::{
    AnnotationSet, ClassTaxonomy, DatasetManifest, FloatCube, HyperCube, LabelMask, RasterImage,
    ValueRange,
};
