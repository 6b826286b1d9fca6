use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::imaging::LabelMask;

/// Pixel tallies of one class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub intersection: u64,
    pub union: u64,
    pub pred: u64,
    pub gt: u64,
}

impl Counts {
    /// `None` when the class appears in neither mask.
    pub fn iou(&self) -> Option<f64> {
        (self.union > 0).then(|| self.intersection as f64 / self.union as f64)
    }

    fn add(&mut self, o: &Counts) {
        self.intersection += o.intersection;
        self.union += o.union;
        self.pred += o.pred;
        self.gt += o.gt;
    }
}

/// Per-class tallies; sums over samples give dataset-level IoU.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassCounts(pub BTreeMap<u8, Counts>);

impl ClassCounts {
    pub fn merge(&mut self, other: &ClassCounts) {
        for (c, v) in &other.0 {
            self.0.entry(*c).or_default().add(v);
        }
    }

    pub fn ious(&self) -> BTreeMap<u8, Option<f64>> {
        self.0.iter().map(|(&c, v)| (c, v.iou())).collect()
    }
}

pub fn class_counts(pred: &LabelMask, gt: &LabelMask, classes: &[u8]) -> Result<ClassCounts, MetricsError> {
    if pred.size() != gt.size() {
        return Err(MetricsError::ShapeMismatch {
            pred: pred.size(),
            gt: gt.size(),
        });
    }
    let mut table = [Counts::default(); 256];
    for (&p, &g) in pred.class_ids().iter().zip(gt.class_ids()) {
        table[p as usize].pred += 1;
        table[g as usize].gt += 1;
        if p == g {
            table[p as usize].intersection += 1;
            table[p as usize].union += 1;
        } else {
            table[p as usize].union += 1;
            table[g as usize].union += 1;
        }
    }
    Ok(ClassCounts(
        classes.iter().map(|&c| (c, table[c as usize])).collect(),
    ))
}

pub fn iou_per_class(
    pred: &LabelMask,
    gt: &LabelMask,
    classes: &[u8],
) -> Result<BTreeMap<u8, Option<f64>>, MetricsError> {
    Ok(class_counts(pred, gt, classes)?.ious())
}

/// Unweighted mean over the present (`Some`) entries.
pub fn miou<'a>(ious: impl IntoIterator<Item = &'a Option<f64>>) -> Result<f64, MetricsError> {
    let present: Vec<f64> = ious.into_iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(MetricsError::Undefined);
    }
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> LabelMask {
        let mut m = LabelMask::new(rows[0].len(), rows.len());
        for (y, r) in rows.iter().enumerate() {
            for (x, ch) in r.chars().enumerate() {
                let c = ch.to_digit(10).unwrap() as u8;
                m.set(x, y, c, u32::from(c > 0));
            }
        }
        m
    }

    #[test]
    fn identical_masks() {
        let m = mask(&["0112", "0112"]);
        let r = iou_per_class(&m, &m, &[1, 2, 3]).unwrap();
        assert_eq!(r[&1], Some(1.0));
        assert_eq!(r[&2], Some(1.0));
        assert_eq!(r[&3], None);
    }

    #[test]
    fn disjoint_and_partial() {
        let p = mask(&["1100"]);
        let g = mask(&["0011"]);
        assert_eq!(iou_per_class(&p, &g, &[1]).unwrap()[&1], Some(0.0));
        let p = mask(&["1110"]);
        let g = mask(&["0111"]);
        assert_eq!(iou_per_class(&p, &g, &[1]).unwrap()[&1], Some(0.5));
    }

    #[test]
    fn shape_mismatch() {
        assert!(iou_per_class(&LabelMask::new(2, 2), &LabelMask::new(3, 2), &[1]).is_err());
    }

    #[test]
    fn mean_over_present() {
        assert_eq!(miou(&[Some(1.0), Some(0.0)]).unwrap(), 0.5);
        assert_eq!(miou(&[Some(0.7), None]).unwrap(), 0.7);
        assert!(matches!(miou(&[None]), Err(MetricsError::Undefined)));
    }
}
