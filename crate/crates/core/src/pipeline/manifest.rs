use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sr_ops::ResizeAxis;

/// One emitted file. Paths use `/` separators; `source_path` is relative to
/// the input root and `output_path` to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub source_path: String,
    pub output_path: String,
    pub ratio: f64,
    pub axis: ResizeAxis,
    pub seed: u64,
    pub n_frames_in: usize,
    pub n_frames_out: usize,
    pub duration_sec_in: f64,
    pub duration_sec_out: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AugmentManifest {
    pub records: Vec<ManifestRecord>,
}

impl AugmentManifest {
    pub const FILE_NAME: &'static str = "manifest.jsonl";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records always serialise"));
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str(l)
                    .map_err(|e| crate::Error::InvalidArgument(format!("bad manifest line: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { records })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_jsonl().as_bytes())?;
        Ok(())
    }
}
