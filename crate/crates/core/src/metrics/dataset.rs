use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::iou::{class_counts, miou, ClassCounts, Counts};
use super::MetricsError;
use crate::imaging::io::read_mask;
use crate::imaging::{ClassTaxonomy, DatasetManifest, LabelMask, Split};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub id: u8,
    pub name: String,
    pub iou: Option<f64>,
    pub counts: Counts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub miou: Option<f64>,
    pub ious: BTreeMap<u8, Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    /// Dataset-level scores from intersections and unions summed over samples.
    pub classes: Vec<ClassScore>,
    pub miou: Option<f64>,
    pub evaluated: usize,
    /// Samples without a usable prediction or ground truth.
    pub skipped: Vec<String>,
    pub samples: Vec<SampleScore>,
}

impl EvalReport {
    pub fn iou_of(&self, class: u8) -> Option<f64> {
        self.classes.iter().find(|c| c.id == class).and_then(|c| c.iou)
    }
}

/// Accumulates per-sample counts into a dataset report.
#[derive(Clone, Debug)]
pub struct Evaluator {
    taxonomy: ClassTaxonomy,
    totals: ClassCounts,
    samples: Vec<SampleScore>,
    skipped: Vec<String>,
}

impl Evaluator {
    pub fn new(taxonomy: ClassTaxonomy) -> Self {
        Self {
            taxonomy,
            totals: ClassCounts::default(),
            samples: Vec::new(),
            skipped: Vec::new(),
        }
    }

    pub fn add(&mut self, id: &str, pred: &LabelMask, gt: &LabelMask) -> Result<(), MetricsError> {
        let counts = class_counts(pred, gt, &self.taxonomy.ids())?;
        self.add_counts(id, counts);
        Ok(())
    }

    pub fn add_counts(&mut self, id: &str, counts: ClassCounts) {
        let ious = counts.ious();
        self.samples.push(SampleScore {
            id: id.to_string(),
            miou: miou(ious.values()).ok(),
            ious,
        });
        self.totals.merge(&counts);
    }

    pub fn skip(&mut self, id: &str) {
        self.skipped.push(id.to_string());
    }

    pub fn finish(self, method: &str) -> EvalReport {
        let classes: Vec<ClassScore> = self
            .taxonomy
            .classes
            .iter()
            .map(|c| {
                let counts = self.totals.0.get(&c.id).copied().unwrap_or_default();
                ClassScore {
                    id: c.id,
                    name: c.name.clone(),
                    iou: counts.iou(),
                    counts,
                }
            })
            .collect();
        EvalReport {
            method: method.to_string(),
            miou: miou(classes.iter().map(|c| &c.iou)).ok(),
            evaluated: self.samples.len(),
            skipped: self.skipped,
            samples: self.samples,
            classes,
        }
    }
}

/// Where the reference masks of a dataset live.
#[derive(Clone, Debug, PartialEq)]
pub enum GroundTruth {
    /// The `hsi_mask` entry of each manifest record.
    ManifestHsiMask,
    /// `<dir>/<id>.png` class-id masks.
    Directory(PathBuf),
}

/// Scores `<pred_dir>/<id>.png` against the ground truth of every manifest
/// sample (optionally one split). Samples lacking either mask are skipped.
pub fn evaluate_dataset(
    manifest: &DatasetManifest,
    split: Option<Split>,
    pred_dir: &Path,
    gt: &GroundTruth,
    method: &str,
) -> Result<EvalReport, MetricsError> {
    let classes = manifest.classes.ids();
    let records: Vec<_> = manifest
        .samples
        .iter()
        .filter(|s| split.is_none_or(|sp| s.split == sp))
        .collect();
    let scored: Vec<Result<Option<ClassCounts>, MetricsError>> = records
        .par_iter()
        .map(|s| {
            let pred_path = pred_dir.join(format!("{}.png", s.id));
            let gt_path = match gt {
                GroundTruth::ManifestHsiMask => s.hsi_mask.as_ref().map(|p| manifest.resolve(p)),
                GroundTruth::Directory(d) => Some(d.join(format!("{}.png", s.id))),
            };
            let Some(gt_path) = gt_path.filter(|p| p.is_file()) else {
                return Ok(None);
            };
            if !pred_path.is_file() {
                return Ok(None);
            }
            let pred = read_mask(&pred_path)?;
            let gt = read_mask(&gt_path)?;
            class_counts(&pred, &gt, &classes).map(Some)
        })
        .collect();
    let mut ev = Evaluator::new(manifest.classes.clone());
    for (s, r) in records.iter().zip(scored) {
        match r? {
            Some(c) => ev.add_counts(&s.id, c),
            None => ev.skip(&s.id),
        }
    }
    Ok(ev.finish(method))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let mut m = LabelMask::new(8, 8);
        m.set(1, 1, 1, 1);
        m.set(5, 5, 6, 2);
        let mut ev = Evaluator::new(ClassTaxonomy::default());
        ev.add("a", &m, &m).unwrap();
        ev.skip("b");
        let r = ev.finish("LT");
        assert_eq!(r.miou, Some(1.0));
        assert_eq!(r.iou_of(1), Some(1.0));
        assert_eq!(r.iou_of(2), None);
        assert_eq!(r.skipped, vec!["b".to_string()]);
        assert_eq!(r.evaluated, 1);
    }

    #[test]
    fn aggregation_sums_before_dividing() {
        // sample 1: IoU 1/2 on a 2-pixel union; sample 2: IoU 1 on 1 pixel
        let mut p1 = LabelMask::new(2, 1);
        p1.set(0, 0, 1, 1);
        p1.set(1, 0, 1, 1);
        let mut g1 = LabelMask::new(2, 1);
        g1.set(0, 0, 1, 1);
        let mut p2 = LabelMask::new(2, 1);
        p2.set(0, 0, 1, 1);
        let mut ev = Evaluator::new(ClassTaxonomy::default());
        ev.add("1", &p1, &g1).unwrap();
        ev.add("2", &p2, &p2).unwrap();
        let r = ev.finish("x");
        assert!((r.iou_of(1).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }
}
