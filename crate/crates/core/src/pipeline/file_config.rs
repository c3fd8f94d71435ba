use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sr_ops::ResizeAxis;

/// Settings read from a `key = value` TOML file. Keys mirror the `augment`
/// flags; dashes and underscores are interchangeable.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(alias = "ratio_min")]
    pub ratio_min: Option<f64>,
    #[serde(alias = "ratio_max")]
    pub ratio_max: Option<f64>,
    pub variants: Option<usize>,
    pub axis: Option<ResizeAxis>,
    pub seed: Option<u64>,
    #[serde(alias = "noise_std")]
    pub noise_std: Option<f64>,
    #[serde(alias = "gl_iters")]
    pub gl_iters: Option<usize>,
    #[serde(alias = "vocoder_cmd")]
    pub vocoder_cmd: Option<String>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config file: {e}")))
    }

    /// Reads a config file; relative `in`/`out` paths resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_both_key_spellings() {
        let a =
            FileConfig::parse("ratio-min = 0.9\nnoise_std = 0.2\naxis = \"horizontal\"\nin = \"x\"").unwrap();
        assert_eq!(a.ratio_min, Some(0.9));
        assert_eq!(a.noise_std, Some(0.2));
        assert_eq!(a.axis, Some(ResizeAxis::Horizontal));
        assert_eq!(a.input, Some(PathBuf::from("x")));
        assert!(FileConfig::parse("ratio = 1.0").is_err());
    }
}
