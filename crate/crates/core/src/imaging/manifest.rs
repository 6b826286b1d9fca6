//! Dataset manifest: sample records, class taxonomy and the sensor crop
//! configuration shared by every sample.
//!
//! ```json
//! {
//!   "version": 1,
//!   "classes": [{"id": 1, "name": "film"}, ...],
//!   "preprocess": {"rgb_crop": null, "cube_crop": null, "target_size": [256, 256]},
//!   "samples": [
//!     {"id": "s0001", "rgb": "rgb/s0001.png", "cube": "cube/s0001.hdr",
//!      "annotations": "ann/s0001.json", "split": "train",
//!      "hsi_mask": "gt_hsi/s0001.png", "affines": "affines/s0001.json"}
//!   ]
//! }
//! ```
//!
//! `hsi_mask` (ground truth drawn in the hyperspectral frame) and `affines`
//! (per-instance RGB→HSI transforms, known only for synthetic data) are
//! optional. Relative paths resolve against the manifest's directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::annotations::ClassTaxonomy;
use super::io::{read_json, write_json};
use super::preprocess::PreprocessConfig;
use super::ImagingError;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub rgb: PathBuf,
    pub cube: PathBuf,
    pub annotations: PathBuf,
    pub split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hsi_mask: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affines: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    #[serde(default)]
    pub classes: ClassTaxonomy,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    pub samples: Vec<SampleRecord>,
    #[serde(skip)]
    root: PathBuf,
}

impl DatasetManifest {
    pub fn new(classes: ClassTaxonomy, preprocess: PreprocessConfig, root: impl Into<PathBuf>) -> Self {
        Self {
            version: MANIFEST_VERSION,
            classes,
            preprocess,
            samples: Vec::new(),
            root: root.into(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ImagingError> {
        let mut m: DatasetManifest = read_json(path)?;
        m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), ImagingError> {
        write_json(path, self)
    }

    pub fn validate(&self) -> Result<(), ImagingError> {
        if self.version != MANIFEST_VERSION {
            return Err(ImagingError::InvalidManifest(format!(
                "unsupported manifest version {}",
                self.version
            )));
        }
        self.classes.validate()?;
        let mut ids = BTreeSet::new();
        for s in &self.samples {
            if !ids.insert(s.id.as_str()) {
                return Err(ImagingError::InvalidManifest(format!("duplicate sample id {:?}", s.id)));
            }
        }
        Ok(())
    }

    /// Lists sample files that do not exist on disk.
    pub fn missing_files(&self) -> Vec<PathBuf> {
        self.samples
            .iter()
            .flat_map(|s| {
                [Some(&s.rgb), Some(&s.cube), Some(&s.annotations), s.hsi_mask.as_ref(), s.affines.as_ref()]
            })
            .flatten()
            .map(|p| self.resolve(p))
            .filter(|p| !p.exists())
            .collect()
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn sample(&self, id: &str) -> Option<&SampleRecord> {
        self.samples.iter().find(|s| s.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str) -> SampleRecord {
        SampleRecord {
            id: id.into(),
            rgb: format!("rgb/{id}.png").into(),
            cube: format!("cube/{id}.hdr").into(),
            annotations: format!("ann/{id}.json").into(),
            split: Split::Train,
            hsi_mask: None,
            affines: None,
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut m = DatasetManifest::new(ClassTaxonomy::default(), PreprocessConfig::default(), "");
        m.samples.push(record("a"));
        m.samples.push(record("a"));
        assert!(matches!(m.validate(), Err(ImagingError::InvalidManifest(_))));
    }

    #[test]
    fn paths_resolve_relative_to_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = DatasetManifest::new(ClassTaxonomy::default(), PreprocessConfig::default(), "");
        m.samples.push(record("a"));
        let path = dir.path().join("sub/manifest.json");
        m.save(&path).unwrap();
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(back.resolve(Path::new("rgb/a.png")), dir.path().join("sub/rgb/a.png"));
        assert_eq!(back.missing_files().len(), 3);
        assert_eq!(back.samples, m.samples);
    }
}
