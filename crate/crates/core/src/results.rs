//! Classifier decisions in the shared results format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One classifier decision. `score` is present for verifiers that produce a
/// win proportion; external classifiers only report label and confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub sample_id: String,
    pub truth: u8,
    pub label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub confidence: f64,
}

impl VerificationResult {
    pub fn from_score(sample_id: String, truth: u8, score: f64, threshold: f64) -> Self {
        let label = u8::from(score > threshold);
        VerificationResult {
            sample_id,
            truth,
            label,
            score: Some(score),
            confidence: score.max(1.0 - score),
        }
    }

    pub fn correct(&self) -> bool {
        self.label == self.truth
    }
}

pub fn write_results(path: &Path, results: &[VerificationResult]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in results {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<VerificationResult>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_and_confidence_follow_score() {
        let r = VerificationResult::from_score("s".into(), 1, 0.5, 0.5);
        assert_eq!((r.label, r.confidence), (0, 0.5));
        let r = VerificationResult::from_score("s".into(), 1, 0.51, 0.5);
        assert_eq!(r.label, 1);
        let r = VerificationResult::from_score("s".into(), 0, 0.2, 0.5);
        assert_eq!((r.label, r.confidence), (0, 0.8));
    }

    #[test]
    fn score_is_omitted_when_absent() {
        let r = VerificationResult {
            sample_id: "x".into(),
            truth: 1,
            label: 1,
            score: None,
            confidence: 0.9,
        };
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(line, r#"{"sample_id":"x","truth":1,"label":1,"confidence":0.9}"#);
        assert_eq!(serde_json::from_str::<VerificationResult>(&line).unwrap(), r);
    }
}
