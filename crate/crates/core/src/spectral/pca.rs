use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::imaging::io::{read_json, write_json};
use crate::imaging::{Cube, FloatCube};

pub const PCA_MODEL_VERSION: u32 = 1;

/// Rows per partial sum. Fixed so that the reduction order, and therefore
/// the floating-point result, does not depend on the thread count.
const CHUNK_ROWS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub version: u32,
    pub k: usize,
    pub source_band_count: usize,
    pub mean: Vec<f64>,
    /// `k` rows of length `source_band_count`, one principal axis each.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    /// Eigenvalues of the retained axes (sample covariance, divisor N − 1).
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    /// Projects one spectrum onto the retained axes.
    pub fn project(&self, spectrum: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|row| {
                row.iter()
                    .zip(spectrum.iter().zip(&self.mean))
                    .map(|(c, (v, m))| c * (v - m))
                    .sum()
            })
            .collect()
    }

    /// Maps projected coordinates back to a spectrum.
    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (row, &a) in self.components.iter().zip(coords) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += a * c;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.version != PCA_MODEL_VERSION {
            return Err(SpectralError::UnsupportedVersion(self.version));
        }
        let c = self.source_band_count;
        let ok = self.k >= 1
            && self.k <= c
            && self.mean.len() == c
            && self.components.len() == self.k
            && self.components.iter().all(|r| r.len() == c)
            && self.explained_variance_ratio.len() == self.k;
        if !ok {
            return Err(SpectralError::InvalidModel("inconsistent dimensions".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), SpectralError> {
        write_json(path, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SpectralError> {
        let m: PcaModel = read_json(path)?;
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcaFitConfig {
    /// Pixels used for fitting at most; larger inputs are subsampled uniformly.
    pub max_samples: usize,
    pub seed: u64,
}

impl Default for PcaFitConfig {
    fn default() -> Self {
        Self {
            max_samples: 1_000_000,
            seed: 0,
        }
    }
}

/// Fits a rank-`k` PCA model to `data`, an `N × bands` row-major array of
/// spectra.
pub fn pca_fit(data: &[f64], bands: usize, k: usize) -> Result<PcaModel, SpectralError> {
    if k == 0 || k > bands {
        return Err(SpectralError::BadRank { k, bands });
    }
    if !data.len().is_multiple_of(bands) {
        return Err(SpectralError::ShapeMismatch {
            expected: bands,
            actual: data.len() % bands,
        });
    }
    let n = data.len() / bands;
    if n <= k {
        return Err(SpectralError::DegenerateData(format!(
            "{n} samples for {k} components"
        )));
    }

    let chunks: Vec<&[f64]> = data.chunks(CHUNK_ROWS * bands).collect();
    let sums: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|chunk| {
            let mut s = vec![0.0; bands];
            for row in chunk.chunks_exact(bands) {
                for (a, v) in s.iter_mut().zip(row) {
                    *a += v;
                }
            }
            s
        })
        .collect();
    let mut mean = vec![0.0; bands];
    for s in &sums {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    // upper triangle of the centered scatter matrix, per chunk
    let tri = bands * (bands + 1) / 2;
    let partials: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|chunk| {
            let mut acc = vec![0.0; tri];
            let mut centered = vec![0.0; bands];
            for row in chunk.chunks_exact(bands) {
                for ((c, v), m) in centered.iter_mut().zip(row).zip(&mean) {
                    *c = v - m;
                }
                let mut idx = 0;
                for i in 0..bands {
                    let ci = centered[i];
                    for &cj in &centered[i..] {
                        acc[idx] += ci * cj;
                        idx += 1;
                    }
                }
            }
            acc
        })
        .collect();
    let mut scatter = vec![0.0; tri];
    for p in &partials {
        for (s, v) in scatter.iter_mut().zip(p) {
            *s += v;
        }
    }

    let mut cov = DMatrix::<f64>::zeros(bands, bands);
    let mut idx = 0;
    for i in 0..bands {
        for j in i..bands {
            let v = scatter[idx] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
            idx += 1;
        }
    }
    let total: f64 = (0..bands).map(|i| cov[(i, i)]).sum();
    let mean_sq: f64 = mean.iter().map(|m| m * m).sum();
    if !(total > 1e-24 * (1.0 + mean_sq)) {
        return Err(SpectralError::DegenerateData("zero covariance".into()));
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..bands).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(k);
    let mut variance = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let pivot = v
            .iter()
            .enumerate()
            .fold(0, |best, (j, x)| if x.abs() > v[best].abs() { j } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for x in &mut v {
            *x *= sign / norm;
        }
        components.push(v);
        variance.push(eig.eigenvalues[i].max(0.0));
    }
    let explained_variance_ratio = variance.iter().map(|v| (v / total).clamp(0.0, 1.0)).collect();
    Ok(PcaModel {
        version: PCA_MODEL_VERSION,
        k,
        source_band_count: bands,
        mean,
        components,
        explained_variance_ratio,
        explained_variance: variance,
    })
}

/// Fits over the pixels of several cubes, subsampling to at most
/// `cfg.max_samples` pixels drawn uniformly without replacement.
pub fn pca_fit_cubes<C: Cube>(cubes: &[&C], k: usize, cfg: &PcaFitConfig) -> Result<PcaModel, SpectralError> {
    let Some(first) = cubes.first() else {
        return Err(SpectralError::DegenerateData("no cubes".into()));
    };
    let bands = first.bands();
    for c in cubes {
        if c.bands() != bands {
            return Err(SpectralError::ShapeMismatch {
                expected: bands,
                actual: c.bands(),
            });
        }
    }
    let offsets: Vec<usize> = cubes
        .iter()
        .scan(0usize, |acc, c| {
            let start = *acc;
            *acc += c.pixel_count();
            Some(start)
        })
        .collect();
    let total: usize = cubes.iter().map(|c| c.pixel_count()).sum();
    let picked: Vec<usize> = if total > cfg.max_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut v = sample(&mut rng, total, cfg.max_samples).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..total).collect()
    };
    let mut data = vec![0.0; picked.len() * bands];
    data.par_chunks_mut(bands)
        .zip(picked.par_iter())
        .for_each(|(row, &g)| {
            let ci = offsets.partition_point(|&o| o <= g) - 1;
            cubes[ci].spectrum_into(g - offsets[ci], row);
        });
    pca_fit(&data, bands, k)
}

/// Up to `count` pixel spectra of `cube` drawn without replacement (all
/// pixels when `count` covers the cube), in pixel order, as an
/// `N × bands` row-major array.
pub fn sample_spectra<C: Cube>(cube: &C, count: usize, seed: u64) -> Vec<f64> {
    let n = cube.pixel_count();
    let bands = cube.bands();
    let picked: Vec<usize> = if count < n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = sample(&mut rng, n, count).into_vec();
        v.sort_unstable();
        v
    } else {
        (0..n).collect()
    };
    let mut data = vec![0.0; picked.len() * bands];
    data.par_chunks_mut(bands)
        .zip(picked.par_iter())
        .for_each(|(row, &p)| cube.spectrum_into(p, row));
    data
}

/// Projects every pixel of `cube`; the result has `model.k` bands.
pub fn pca_apply<C: Cube>(cube: &C, model: &PcaModel) -> Result<FloatCube, SpectralError> {
    if cube.bands() != model.source_band_count {
        return Err(SpectralError::ShapeMismatch {
            expected: model.source_band_count,
            actual: cube.bands(),
        });
    }
    let n = cube.pixel_count();
    let k = model.k;
    let bands = cube.bands();
    let mut interleaved = vec![0.0f32; n * k];
    interleaved
        .par_chunks_mut(k * 1024)
        .enumerate()
        .for_each(|(ci, out)| {
            let mut spec = vec![0.0; bands];
            for (j, px) in out.chunks_exact_mut(k).enumerate() {
                cube.spectrum_into(ci * 1024 + j, &mut spec);
                for (o, v) in px.iter_mut().zip(model.project(&spec)) {
                    *o = v as f32;
                }
            }
        });
    let mut bsq = vec![0.0f32; n * k];
    for (p, px) in interleaved.chunks_exact(k).enumerate() {
        for (b, &v) in px.iter().enumerate() {
            bsq[b * n + p] = v;
        }
    }
    Ok(FloatCube::from_parts_unchecked(cube.width(), cube.height(), k, bsq, None))
}
