pub mod evaluate;
pub mod extract;
pub mod fit;
pub mod predict;
pub mod synth;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;

use crate::config::{require_files, PipelineConfig};
use fatigue_core::ingest::{parse_subjects, SubjectTable};
use fatigue_core::Dataset;

/// Feature table from `flag`, else the configured location.
pub(crate) fn load_features(cfg: &PipelineConfig, flag: Option<PathBuf>) -> Result<(PathBuf, Dataset)> {
    let path = flag.unwrap_or_else(|| cfg.features_path());
    require_files([path.as_path()])?;
    let data = Dataset::read_csv(&path).with_context(|| format!("reading {}", path.display()))?;
    info!(
        "{}: {} rows, {} features",
        path.display(),
        data.len(),
        data.n_features()
    );
    Ok((path, data))
}

/// Demographics from `flag`, else the configured or conventional location, if any.
pub(crate) fn load_subjects(cfg: &PipelineConfig, flag: Option<PathBuf>) -> Result<Option<SubjectTable>> {
    let Some(path) = flag.or_else(|| cfg.subjects_path()) else {
        return Ok(None);
    };
    require_files([path.as_path()])?;
    let table = parse_subjects(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(table))
}

pub(crate) fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
