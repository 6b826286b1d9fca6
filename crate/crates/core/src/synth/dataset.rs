//! Writes synthetic benchmarks in the on-disk dataset layout.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::render::render_views;
use super::scene::{generate_scene, SceneConfig};
use super::SynthError;
use crate::geometry::AffineTransform;
use crate::imaging::io::{write_envi_u16, write_json, write_mask, write_png};
use crate::imaging::{ClassTaxonomy, DatasetManifest, ImagingError, PreprocessConfig, SampleRecord, Split};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Seed of scene `index` of a benchmark seeded with `seed`.
pub fn scene_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sample_id(index: usize) -> String {
    format!("s{index:04}")
}

/// Train/val/test assignment in a 7:1:2 pattern.
pub fn split_of(index: usize) -> Split {
    match index % 10 {
        0..=6 => Split::Train,
        7 => Split::Val,
        _ => Split::Test,
    }
}

fn create_dir(p: &Path) -> Result<(), ImagingError> {
    fs::create_dir_all(p).map_err(|source| ImagingError::Io {
        path: p.to_path_buf(),
        source,
    })
}

fn write_sample(out: &Path, cfg: &SceneConfig, seed: u64, index: usize) -> Result<SampleRecord, SynthError> {
    let id = sample_id(index);
    let scene = generate_scene(scene_seed(seed, index), cfg)?;
    let views = render_views(&scene);
    let rec = SampleRecord {
        id: id.clone(),
        rgb: PathBuf::from(format!("rgb/{id}.png")),
        cube: PathBuf::from(format!("cube/{id}.hdr")),
        annotations: PathBuf::from(format!("ann/{id}.json")),
        split: split_of(index),
        hsi_mask: Some(PathBuf::from(format!("gt_hsi/{id}.png"))),
        affines: Some(PathBuf::from(format!("affines/{id}.json"))),
    };
    write_png(&out.join(&rec.rgb), &views.rgb)?;
    write_envi_u16(&out.join(&rec.cube), &views.cube)?;
    write_json(&out.join(&rec.annotations), &views.annotations)?;
    write_mask(&out.join(rec.hsi_mask.as_ref().expect("set")), &views.gt_mask_hsi)?;
    write_json(&out.join(rec.affines.as_ref().expect("set")), &views.gt_affines)?;
    Ok(rec)
}

/// Generates `scenes` samples under `out` and writes `out/manifest.json`.
/// Output bytes depend only on `cfg`, `scenes` and `seed`.
pub fn write_dataset(out: &Path, cfg: &SceneConfig, scenes: usize, seed: u64) -> Result<DatasetManifest, SynthError> {
    cfg.validate()?;
    for sub in ["rgb", "cube", "ann", "gt_hsi", "affines"] {
        create_dir(&out.join(sub))?;
    }
    let records: Vec<SampleRecord> = (0..scenes)
        .into_par_iter()
        .map(|i| write_sample(out, cfg, seed, i))
        .collect::<Result<_, _>>()?;
    let preprocess = PreprocessConfig {
        rgb_crop: Some(cfg.rgb_crop),
        cube_crop: None,
        target_size: cfg.hsi_size,
        ..PreprocessConfig::default()
    };
    let mut manifest = DatasetManifest::new(ClassTaxonomy::default(), preprocess, out);
    manifest.samples = records;
    manifest.save(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Reads a per-instance affine file written by [`write_dataset`].
pub fn read_affines(path: &Path) -> Result<BTreeMap<u32, AffineTransform>, ImagingError> {
    crate::imaging::io::read_json(path)
}
