//! Class colors and reflectance spectra of the simulated materials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::imaging::{FloatCube, BASKET, CARDBOARD, FILAMENT, FILM, TRASH_BAG, VIDEO_TAPE};

pub const DEFAULT_BANDS: usize = 224;
pub const WAVELENGTH_RANGE_NM: (f64, f64) = (900.0, 1700.0);
/// Mean reflectance per unit of RGB luma.
pub const SPECTRAL_GAIN: f64 = 0.5;

/// Evenly spaced band centers across `range`.
pub fn wavelengths(bands: usize, range: (f64, f64)) -> Vec<f64> {
    if bands == 1 {
        return vec![range.0];
    }
    let step = (range.1 - range.0) / (bands - 1) as f64;
    (0..bands).map(|i| range.0 + step * i as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Appearance {
    pub rgb: [f64; 3],
    /// Reflectance per band; its mean is [`SPECTRAL_GAIN`] times the luma of
    /// `rgb`.
    pub spectrum: Vec<f64>,
}

pub fn luma(rgb: [f64; 3]) -> f64 {
    0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]
}

/// `(center nm, width nm, amplitude)` bumps on a baseline.
fn bumps(class: u8) -> (f64, &'static [(f64, f64, f64)]) {
    match class {
        FILM => (0.3, &[(1210.0, 40.0, -0.15), (1400.0, 60.0, 0.4), (1660.0, 30.0, 0.25)]),
        BASKET => (0.2, &[(1000.0, 90.0, 0.5), (1550.0, 50.0, -0.1)]),
        CARDBOARD => (0.25, &[(1100.0, 150.0, 0.35), (1480.0, 40.0, -0.2), (1600.0, 80.0, 0.3)]),
        VIDEO_TAPE => (0.1, &[(950.0, 30.0, 0.3), (1300.0, 100.0, 0.1)]),
        FILAMENT => (0.15, &[(1250.0, 50.0, 0.6), (1700.0, 120.0, 0.2)]),
        TRASH_BAG => (0.12, &[(1150.0, 35.0, 0.2), (1500.0, 70.0, 0.45)]),
        // conveyor belt
        _ => (0.4, &[(1350.0, 400.0, 0.1)]),
    }
}

fn color(class: u8) -> [f64; 3] {
    match class {
        FILM => [0.85, 0.85, 0.8],
        BASKET => [0.2, 0.45, 0.75],
        CARDBOARD => [0.65, 0.5, 0.3],
        VIDEO_TAPE => [0.08, 0.08, 0.09],
        FILAMENT => [0.9, 0.3, 0.2],
        TRASH_BAG => [0.15, 0.15, 0.2],
        _ => [0.28, 0.28, 0.3],
    }
}

/// Appearance of `class` (0 is the background belt) over `wavelengths`.
pub fn appearance(class: u8, wavelengths: &[f64]) -> Appearance {
    let rgb = color(class);
    let (base, bs) = bumps(class);
    let raw: Vec<f64> = wavelengths
        .iter()
        .map(|&l| {
            let s: f64 = bs
                .iter()
                .map(|&(c, w, a)| a * (-(l - c).powi(2) / (2.0 * w * w)).exp())
                .sum();
            (base + s).max(0.01)
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let target = SPECTRAL_GAIN * luma(rgb);
    Appearance {
        rgb,
        spectrum: raw.iter().map(|v| v * target / mean).collect(),
    }
}

/// Cube of random convex mixtures of `endmembers` (class spectra, in class
/// id order) plus Gaussian noise of standard deviation `noise`. Returns the
/// cube and the endmember spectra.
pub fn mixture_cube(
    seed: u64,
    size: (usize, usize),
    endmembers: usize,
    bands: usize,
    noise: f64,
) -> (FloatCube, Vec<Vec<f64>>) {
    let wl = wavelengths(bands, WAVELENGTH_RANGE_NM);
    let ems: Vec<Vec<f64>> = (0..endmembers)
        .map(|i| appearance(1 + (i % 6) as u8, &wl).spectrum)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(0.0)).expect("valid sigma");
    let n = size.0 * size.1;
    let mut data = vec![0.0f32; n * bands];
    for p in 0..n {
        let raw: Vec<f64> = (0..endmembers).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        for b in 0..bands {
            let v: f64 = raw
                .iter()
                .zip(&ems)
                .map(|(a, e)| a / total * e[b])
                .sum::<f64>()
                + if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            data[b * n + p] = v as f32;
        }
    }
    let cube = FloatCube::new(size.0, size.1, bands, data, Some(wl)).expect("consistent shape");
    (cube, ems)
}
