//! Segmentation scoring: per-class IoU, mIoU, median-frequency weights and
//! dataset reports.

use thiserror::Error;

use crate::imaging::ImagingError;

mod dataset;
mod iou;
mod table;
mod weights;

pub use dataset::{evaluate_dataset, ClassScore, EvalReport, Evaluator, GroundTruth, SampleScore};
pub use iou::{class_counts, iou_per_class, miou, ClassCounts, Counts};
pub use table::{render_table, TableRow};
pub use weights::{median_freq_weights, weights_from_frequencies, ClassWeights};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction is {pred:?} but ground truth is {gt:?}")]
    ShapeMismatch {
        pred: (usize, usize),
        gt: (usize, usize),
    },
    #[error("mIoU undefined: no class present")]
    Undefined,
    #[error("no labeled pixels for any class")]
    NoLabeledPixels,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}
