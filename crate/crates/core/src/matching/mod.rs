//! Point correspondences between a source image and a target image.
//!
//! Every provider implements [`PointMatcher`]: one output slot per query,
//! in query order, `None` meaning no confident match.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::imaging::RasterImage;

mod file;
mod ncc;
mod oracle;

pub use file::{write_records, FileMatcher, MatchRecord, DEFAULT_SNAP_RADIUS};
pub use ncc::NccMatcher;
pub use oracle::OracleMatcher;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("bad query: {0}")]
    BadQuery(String),
    #[error("no correspondence file at {}", .0.display())]
    MissingMatches(PathBuf),
    #[error("{}:{line}: {message}", path.display())]
    ParseError {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub source: Point,
    pub target: Point,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatcherConfig {
    pub window_radius: usize,
    pub search_radius: usize,
    pub pyramid_levels: usize,
    pub min_confidence: f64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            window_radius: 15,
            search_radius: 48,
            pyramid_levels: 3,
            min_confidence: 0.5,
        }
    }
}

impl MatcherConfig {
    pub fn validate(&self) -> Result<(), MatchError> {
        if self.window_radius == 0 || self.search_radius == 0 || self.pyramid_levels == 0 {
            return Err(MatchError::BadQuery(format!(
                "radii and pyramid levels must be positive: {self:?}"
            )));
        }
        if !self.min_confidence.is_finite() {
            return Err(MatchError::BadQuery("min_confidence must be finite".into()));
        }
        Ok(())
    }
}

pub trait PointMatcher: Sync {
    /// Matches `queries` (source-frame coordinates) into the target frame.
    fn match_points(
        &self,
        source: &RasterImage,
        target: &RasterImage,
        queries: &[Point],
    ) -> Result<Vec<Option<Correspondence>>, MatchError>;
}

/// `true` when `p` lies on a pixel of a `size` frame.
pub fn in_frame(p: Point, size: (usize, usize)) -> bool {
    p.x >= -0.5 && p.y >= -0.5 && p.x < size.0 as f64 - 0.5 && p.y < size.1 as f64 - 0.5
}

pub(crate) fn check_queries(queries: &[Point], size: (usize, usize)) -> Result<(), MatchError> {
    match queries.iter().position(|&q| !in_frame(q, size)) {
        Some(i) => Err(MatchError::BadQuery(format!(
            "query {i} at ({}, {}) outside the {}x{} source frame",
            queries[i].x, queries[i].y, size.0, size.1
        ))),
        None => Ok(()),
    }
}
