//! Versioned JSON files for trained ensembles.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use incpers_core::ensemble::EnsembleModel;
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "incpers-ensemble";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub format: String,
    pub format_version: u32,
    pub library_version: String,
    pub feature_count: usize,
    pub ensemble: EnsembleModel,
}

impl EnsembleFile {
    pub fn new(ensemble: EnsembleModel, feature_count: usize) -> Self {
        EnsembleFile {
            format: FORMAT.into(),
            format_version: FORMAT_VERSION,
            library_version: incpers_core::VERSION.into(),
            feature_count,
            ensemble,
        }
    }
}

pub fn to_json(file: &EnsembleFile) -> Result<String> {
    Ok(serde_json::to_string_pretty(file)?)
}

pub fn from_json(text: &str) -> Result<EnsembleFile> {
    #[derive(Deserialize)]
    struct Head {
        format: String,
        format_version: u32,
    }
    let head: Head = serde_json::from_str(text).context("not an ensemble file")?;
    if head.format != FORMAT {
        bail!("unknown format {:?}", head.format);
    }
    if head.format_version != FORMAT_VERSION {
        bail!("unsupported ensemble format version {} (this build reads {FORMAT_VERSION})", head.format_version);
    }
    Ok(serde_json::from_str(text)?)
}

pub fn save(path: &Path, file: &EnsembleFile) -> Result<()> {
    fs::write(path, to_json(file)?).with_context(|| format!("writing {}", path.display()))
}

pub fn load(path: &Path) -> Result<EnsembleFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(&text).with_context(|| format!("parsing {}", path.display()))
}
