//! Correspondences read from a JSON-lines file, one record per line:
//! `{"sample_id": "...", "src": [x, y], "dst": [x, y], "confidence": c}`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_queries, Correspondence, MatchError, PointMatcher};
use crate::geometry::Point;
use crate::imaging::RasterImage;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchRecord {
    pub sample_id: String,
    pub src: Point,
    pub dst: Point,
    pub confidence: f64,
}

/// Serves stored pairs of one sample: each query gets the stored pair whose
/// source lies nearest to it, within `snap_radius`.
#[derive(Clone, Debug)]
pub struct FileMatcher {
    records: Vec<MatchRecord>,
    pub snap_radius: f64,
    pub min_confidence: f64,
}

pub const DEFAULT_SNAP_RADIUS: f64 = 2.0;

impl FileMatcher {
    pub fn from_records(records: Vec<MatchRecord>) -> Self {
        Self {
            records,
            snap_radius: DEFAULT_SNAP_RADIUS,
            min_confidence: 0.0,
        }
    }

    /// Reads every record of `sample_id` from `path`.
    pub fn load(path: &Path, sample_id: &str) -> Result<Self, MatchError> {
        if !path.is_file() {
            return Err(MatchError::MissingMatches(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|source| MatchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: MatchRecord = serde_json::from_str(line).map_err(|e| MatchError::ParseError {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if !rec.confidence.is_finite() {
                return Err(MatchError::ParseError {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "non-finite confidence".into(),
                });
            }
            if rec.sample_id == sample_id {
                records.push(rec);
            }
        }
        Ok(Self::from_records(records))
    }

    pub fn records(&self) -> &[MatchRecord] {
        &self.records
    }
}

/// Writes records as JSON lines.
pub fn write_records(path: &Path, records: &[MatchRecord]) -> Result<(), MatchError> {
    let io = |source| MatchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(f, "{line}").map_err(io)?;
    }
    f.flush().map_err(io)
}

impl PointMatcher for FileMatcher {
    fn match_points(
        &self,
        source: &RasterImage,
        target: &RasterImage,
        queries: &[Point],
    ) -> Result<Vec<Option<Correspondence>>, MatchError> {
        check_queries(queries, source.size())?;
        let tsize = target.size();
        Ok(queries
            .iter()
            .map(|q| {
                let mut best: Option<(f64, &MatchRecord)> = None;
                for r in &self.records {
                    let d = r.src.distance(q);
                    if d <= self.snap_radius && best.is_none_or(|b| d < b.0) {
                        best = Some((d, r));
                    }
                }
                let (_, r) = best?;
                if r.confidence < self.min_confidence || !super::in_frame(r.dst, tsize) {
                    return None;
                }
                Some(Correspondence {
                    source: r.src,
                    target: r.dst,
                    confidence: r.confidence.clamp(0.0, 1.0),
                })
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ValueRange;

    fn blank() -> RasterImage {
        RasterImage::zeros(32, 32, 1, ValueRange::UnitFloat)
    }

    fn rec(sx: f64, sy: f64, dx: f64, dy: f64) -> MatchRecord {
        MatchRecord {
            sample_id: "a".into(),
            src: Point::new(sx, sy),
            dst: Point::new(dx, dy),
            confidence: 0.9,
        }
    }

    #[test]
    fn exact_and_snapped() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        let mut other = rec(5.0, 5.0, 0.0, 0.0);
        other.sample_id = "b".into();
        write_records(&p, &[rec(3.0, 4.0, 6.0, 7.0), rec(10.0, 10.0, 12.0, 11.0), other]).unwrap();
        let m = FileMatcher::load(&p, "a").unwrap();
        assert_eq!(m.records().len(), 2);
        let out = m
            .match_points(
                &blank(),
                &blank(),
                &[Point::new(3.0, 4.0), Point::new(11.0, 10.0), Point::new(20.0, 20.0)],
            )
            .unwrap();
        assert_eq!(out[0].unwrap().target, Point::new(6.0, 7.0));
        assert_eq!(out[1].unwrap().target, Point::new(12.0, 11.0));
        assert!(out[2].is_none());
    }

    #[test]
    fn empty_file_gives_absent_slots() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        std::fs::write(&p, "").unwrap();
        let m = FileMatcher::load(&p, "a").unwrap();
        let out = m.match_points(&blank(), &blank(), &[Point::new(1.0, 1.0)]).unwrap();
        assert_eq!(out, vec![None]);
    }

    #[test]
    fn missing_and_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nope.jsonl");
        assert!(matches!(FileMatcher::load(&p, "a"), Err(MatchError::MissingMatches(_))));
        std::fs::write(&p, "{\"sample_id\":\"a\",\"src\":[1,2]}\n").unwrap();
        assert!(matches!(
            FileMatcher::load(&p, "a"),
            Err(MatchError::ParseError { line: 1, .. })
        ));
    }
}
