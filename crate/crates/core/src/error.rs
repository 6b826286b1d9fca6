use thiserror::Error;

use crate::geometry::GeometryError;
use crate::imaging::ImagingError;
use crate::matching::MatchError;
use crate::metrics::MetricsError;
use crate::spectral::SpectralError;
use crate::synth::SynthError;
use crate::transfer::TransferError;

/// Crate-level error, one variant per module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Matching(#[from] MatchError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
