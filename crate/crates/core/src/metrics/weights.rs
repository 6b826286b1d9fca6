use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::imaging::LabelMask;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub weights: BTreeMap<u8, f64>,
    pub frequencies: BTreeMap<u8, f64>,
    /// Classes without a single labeled pixel; they get no weight.
    pub excluded: Vec<u8>,
    pub warnings: Vec<String>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `w_c = median(freq) / freq_c` over the given (positive) frequencies.
pub fn weights_from_frequencies(freqs: &BTreeMap<u8, f64>) -> BTreeMap<u8, f64> {
    if freqs.is_empty() {
        return BTreeMap::new();
    }
    let med = median(freqs.values().copied().collect());
    freqs.iter().map(|(&c, &f)| (c, med / f)).collect()
}

/// Median-frequency class weights over a set of label masks. A class's
/// frequency is its pixel count divided by the total pixel count of the
/// masks that contain it.
pub fn median_freq_weights(masks: &[&LabelMask], classes: &[u8]) -> Result<ClassWeights, MetricsError> {
    let mut class_px: BTreeMap<u8, u64> = classes.iter().map(|&c| (c, 0)).collect();
    let mut image_px: BTreeMap<u8, u64> = classes.iter().map(|&c| (c, 0)).collect();
    for m in masks {
        let mut hist = [0u64; 256];
        for &c in m.class_ids() {
            hist[c as usize] += 1;
        }
        let total = (m.width() * m.height()) as u64;
        for &c in classes {
            if hist[c as usize] > 0 {
                *class_px.get_mut(&c).expect("listed") += hist[c as usize];
                *image_px.get_mut(&c).expect("listed") += total;
            }
        }
    }
    let mut out = ClassWeights::default();
    for &c in classes {
        if class_px[&c] == 0 {
            out.excluded.push(c);
            out.warnings
                .push(format!("class {c} has no labeled pixels; excluded from weighting"));
        } else {
            out.frequencies
                .insert(c, class_px[&c] as f64 / image_px[&c] as f64);
        }
    }
    if out.frequencies.is_empty() {
        return Err(MetricsError::NoLabeledPixels);
    }
    out.weights = weights_from_frequencies(&out.frequencies);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_weights() {
        let f: BTreeMap<u8, f64> = [(1, 0.1), (2, 0.2), (3, 0.4)].into();
        let w = weights_from_frequencies(&f);
        assert!((w[&1] - 2.0).abs() < 1e-12);
        assert!((w[&2] - 1.0).abs() < 1e-12);
        assert!((w[&3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equal_frequencies_give_unit_weights() {
        let f: BTreeMap<u8, f64> = [(1, 0.3), (2, 0.3)].into();
        assert!(weights_from_frequencies(&f).values().all(|&w| (w - 1.0).abs() < 1e-12));
    }

    #[test]
    fn absent_class_is_excluded() {
        let mut a = LabelMask::new(4, 4);
        a.set(0, 0, 1, 1);
        let mut b = LabelMask::new(4, 4);
        b.set(0, 0, 2, 1);
        b.set(1, 0, 2, 1);
        let w = median_freq_weights(&[&a, &b], &[1, 2, 3]).unwrap();
        assert_eq!(w.excluded, vec![3]);
        assert_eq!(w.warnings.len(), 1);
        // frequencies 1/16 and 2/16, median 1.5/16
        assert!((w.weights[&1] - 1.5).abs() < 1e-12);
        assert!((w.weights[&2] - 0.75).abs() < 1e-12);
        assert!(median_freq_weights(&[&LabelMask::new(2, 2)], &[1]).is_err());
    }
}
