//! Components, boundaries, control points, affine fitting and warping.

use thiserror::Error;

mod affine;
mod components;
mod contour;
mod fit;
mod sampling;
mod warp;

pub use affine::{AffineTransform, Point};
pub use components::{connected_components, BBox, Component, ComponentBitmap};
pub use contour::{trace_contour, Contour};
pub use fit::{fit_affine, AffineFit, FitConfig};
pub use sampling::{default_point_count, sample_contour, ControlPoints, Extreme};
pub use warp::{warp_component, BinaryMask};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("implausible transform: {0}")]
    ImplausibleTransform(String),
}
