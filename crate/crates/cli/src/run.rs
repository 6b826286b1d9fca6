//! Output locations, per-sample outcomes and the `run.json` provenance
//! record.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

pub const ROOT_ENV: &str = "SPECTRAL_TRANSFER_ROOT";
pub const RUN_RECORD: &str = "run.json";

/// Relative output paths are placed under `$SPECTRAL_TRANSFER_ROOT` when it
/// is set.
pub fn output_path(p: &Path) -> PathBuf {
    match std::env::var_os(ROOT_ENV) {
        Some(root) if p.is_relative() && !root.is_empty() => PathBuf::from(root).join(p),
        _ => p.to_path_buf(),
    }
}

pub fn create_dir(p: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(p).with_context(|| format!("cannot create output directory {}", p.display()))
}

/// The error and its causes joined by `: `, leaving out causes whose text
/// the outer message already contains.
pub fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Skipped,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SampleOutcome {
    pub fn ok(id: &str) -> Self {
        Self {
            id: id.to_string(),
            status: Status::Ok,
            error: None,
        }
    }

    pub fn failed(id: &str, err: &anyhow::Error) -> Self {
        Self {
            id: id.to_string(),
            status: Status::Failed,
            error: Some(describe(err)),
        }
    }

    pub fn skipped(id: &str, why: &str) -> Self {
        Self {
            id: id.to_string(),
            status: Status::Skipped,
            error: Some(why.to_string()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub ok: usize,
    pub skipped: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(outcomes: &[SampleOutcome]) -> Self {
        let count = |s| outcomes.iter().filter(|o| o.status == s).count();
        Self {
            total: outcomes.len(),
            ok: count(Status::Ok),
            skipped: count(Status::Skipped),
            failed: count(Status::Failed),
        }
    }

    /// True when there was work to do and none of it succeeded.
    pub fn all_failed(&self) -> bool {
        self.total > 0 && self.ok == 0
    }
}

/// Provenance written next to every run's outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    /// Resolved inputs and settings of the invocation.
    pub inputs: serde_json::Value,
    pub config: serde_json::Value,
    /// Files produced by the run, relative to the output directory.
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SampleOutcome>,
}

fn collect_files(dir: &Path, base: &Path, out: &mut Vec<String>) -> anyhow::Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, base, out)?;
        } else if let Ok(rel) = path.strip_prefix(base) {
            let rel = rel.to_string_lossy().replace('\\', "/");
            if rel != RUN_RECORD {
                out.push(rel);
            }
        }
    }
    Ok(())
}

/// Every file under `dir` except the run record, sorted.
pub fn list_artifacts(dir: &Path) -> anyhow::Result<Vec<String>> {
    let mut v = Vec::new();
    collect_files(dir, dir, &mut v)?;
    v.sort();
    Ok(v)
}

pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

impl RunRecord<'_> {
    pub fn write(mut self, out_dir: &Path) -> anyhow::Result<()> {
        self.artifacts = list_artifacts(out_dir)?;
        write_json_file(&out_dir.join(RUN_RECORD), &self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_causes_are_dropped() {
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        let e = anyhow::Error::new(io).context("a.json: gone").context("loading");
        assert_eq!(describe(&e), "loading: a.json: gone");
    }

    #[test]
    fn summary_counts() {
        let e = anyhow::anyhow!("boom");
        let v = [SampleOutcome::ok("a"), SampleOutcome::failed("b", &e), SampleOutcome::skipped("c", "x")];
        let s = Summary::of(&v);
        assert_eq!((s.total, s.ok, s.failed, s.skipped), (3, 1, 1, 1));
        assert!(!s.all_failed());
        assert!(Summary::of(&v[1..]).all_failed());
        assert!(!Summary::of(&[]).all_failed());
    }

    #[test]
    fn artifacts_are_sorted_and_relative() {
        let d = tempfile::tempdir().unwrap();
        fs::create_dir_all(d.path().join("b")).unwrap();
        fs::write(d.path().join("b/x.json"), "1").unwrap();
        fs::write(d.path().join("a.png"), "1").unwrap();
        fs::write(d.path().join(RUN_RECORD), "1").unwrap();
        assert_eq!(list_artifacts(d.path()).unwrap(), ["a.png", "b/x.json"]);
    }
}
