//! TOML pipeline configuration. Command-line flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fatigue_core::eval::{CvSettings, SplitMode, DEFAULT_TOP_K};
use fatigue_core::extract::{ExtractSettings, InputPaths};
use fatigue_core::models::{ModelSettings, Registry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub input: InputConfig,
    pub extract: ExtractSettings,
    pub models: ModelSettings,
    pub cv: CvConfig,
    pub evaluate: EvaluateConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            threads: None,
            input: InputConfig::default(),
            extract: ExtractSettings::default(),
            models: ModelSettings::default(),
            cv: CvConfig::default(),
            evaluate: EvaluateConfig::default(),
        }
    }
}

/// Raw bundle and feature table locations. Individual files default to the
/// standard names inside `dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subjects: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rr: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accel: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temp: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resp: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// Feature table for `evaluate`/`fit`/`predict`; defaults to
    /// `<out_dir>/features.csv`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            subjects: None,
            rr: None,
            accel: None,
            temp: None,
            resp: None,
            labels: None,
            features: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub split: SplitMode,
}

impl Default for CvConfig {
    fn default() -> Self {
        let d = CvSettings::default();
        Self {
            k: d.k,
            split: d.split,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub models: Vec<String>,
    pub top_k: usize,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            models: Registry::TABLE_MODELS.iter().map(|s| s.to_string()).collect(),
            top_k: DEFAULT_TOP_K,
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        rebase(base, &mut cfg.out_dir);
        let input = &mut cfg.input;
        rebase(base, &mut input.dir);
        for p in [
            &mut input.subjects,
            &mut input.rr,
            &mut input.accel,
            &mut input.temp,
            &mut input.resp,
            &mut input.labels,
            &mut input.features,
        ]
        .into_iter()
        .flatten()
        {
            rebase(base, p);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cv.k < 2 {
            bail!("cv.k = {}, need at least 2 folds", self.cv.k);
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(())
    }

    pub fn cv_settings(&self) -> CvSettings {
        CvSettings {
            k: self.cv.k,
            seed: self.seed,
            split: self.cv.split,
        }
    }

    pub fn input_paths(&self) -> InputPaths {
        let d = InputPaths::in_dir(&self.input.dir);
        let i = &self.input;
        let pick = |o: &Option<PathBuf>, default: PathBuf| o.clone().unwrap_or(default);
        InputPaths {
            subjects: i.subjects.clone().or(d.subjects),
            rr: pick(&i.rr, d.rr),
            accel: pick(&i.accel, d.accel),
            temp: pick(&i.temp, d.temp),
            resp: pick(&i.resp, d.resp),
            labels: pick(&i.labels, d.labels),
        }
    }

    /// Explicit subjects file, else `subjects.csv` in the input directory if present.
    pub fn subjects_path(&self) -> Option<PathBuf> {
        self.input_paths().subjects
    }

    pub fn features_path(&self) -> PathBuf {
        self.input
            .features
            .clone()
            .unwrap_or_else(|| self.out_dir.join("features.csv"))
    }
}

/// Fails with the offending path if any of `paths` is missing.
pub fn require_files<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            bail!("input file {} does not exist", p.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_of_defaults() {
        let cfg = PipelineConfig::default();
        let back: PipelineConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.toml");
        std::fs::write(
            &path,
            "seed = 3\nout_dir = \"res\"\n[input]\ndir = \"raw\"\nlabels = \"/abs/l.csv\"\n[models.forest]\nn_trees = 7\n",
        )
        .unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.out_dir, dir.path().join("res"));
        assert_eq!(cfg.input_paths().rr, dir.path().join("raw").join("rr.csv"));
        assert_eq!(cfg.input_paths().labels, PathBuf::from("/abs/l.csv"));
        assert_eq!(cfg.models.forest.n_trees, 7);
        assert_eq!(cfg.models.forest.min_samples_leaf, 5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sed = 1\n").is_err());
        assert!(toml::from_str::<PipelineConfig>("[cv]\nfolds = 3\n").is_err());
    }

    #[test]
    fn single_fold_is_invalid() {
        let cfg = PipelineConfig {
            cv: CvConfig {
                k: 1,
                ..CvConfig::default()
            },
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
