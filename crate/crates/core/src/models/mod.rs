//! Regressors behind one interface, looked up by name.
//!
//! A [`ModelStrategy`] knows how to train; the [`FittedModel`] it returns
//! predicts, reports importance and serialises itself. The [`Registry`] maps
//! names such as `rf` or `merf_age_bmi` to strategies, so front ends pick
//! models from configuration without matching on types.

mod imputer;
mod strategies;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use imputer::Imputer;
pub use strategies::{ForestStrategy, LinearStrategy, MerfClusterSource, MerfStrategy};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::LinearModel;
use crate::forest::{Forest, ForestParams};
use crate::ingest::SubjectTable;
use crate::merf::{MerfModel, MerfParams};

pub const SAVED_MODEL_VERSION: u32 = 1;

/// Hyper-parameters shared by every strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSettings {
    pub forest: ForestParams,
    pub max_em_iters: usize,
    pub gll_rel_tol: f64,
    /// Quantile bins per demographic variable.
    pub n_bins: usize,
    pub ridge_lambda: f64,
    /// Z-score features before the ridge fit (weights are reported in raw units).
    pub standardize_linear: bool,
}

impl Default for ModelSettings {
    fn default() -> Self {
        let merf = MerfParams::default();
        Self {
            forest: ForestParams::default(),
            max_em_iters: merf.max_em_iters,
            gll_rel_tol: merf.gll_rel_tol,
            n_bins: 3,
            ridge_lambda: 1.0,
            standardize_linear: true,
        }
    }
}

impl ModelSettings {
    pub fn merf_params(&self, seed: u64) -> MerfParams {
        MerfParams {
            forest: self.forest_params(seed),
            max_em_iters: self.max_em_iters,
            gll_rel_tol: self.gll_rel_tol,
            ..MerfParams::default()
        }
    }

    pub fn forest_params(&self, seed: u64) -> ForestParams {
        ForestParams {
            seed,
            ..self.forest
        }
    }
}

/// Inputs available to a strategy at training time.
#[derive(Debug, Clone, Copy)]
pub struct FitContext<'a> {
    pub settings: &'a ModelSettings,
    pub subjects: Option<&'a SubjectTable>,
    pub seed: u64,
}

/// EM summary of a fitted mixed-effects model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedDiagnostics {
    pub sigma2: f64,
    pub sigma_b2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub initial_gll: f64,
    pub final_gll: f64,
    pub n_clusters: usize,
    pub max_abs_intercept: f64,
}

pub trait ModelStrategy: Send + Sync {
    /// Registry key.
    fn name(&self) -> &str;
    /// Human-readable row label for reports.
    fn label(&self) -> &str;
    fn requires_demographics(&self) -> bool {
        false
    }
    fn fit(&self, train: &Dataset, ctx: &FitContext<'_>) -> Result<Box<dyn FittedModel>>;
}

pub trait FittedModel: Send + Sync {
    fn predict(&self, data: &Dataset, subjects: Option<&SubjectTable>) -> Result<Vec<f64>>;
    /// Normalised per-feature importance, when the model has one.
    fn importance(&self) -> Option<&[f64]>;
    fn mixed_diagnostics(&self) -> Option<MixedDiagnostics> {
        None
    }
    fn imputer(&self) -> &Imputer;
    fn saved(&self) -> SavedModel;
}

/// Serialised form of every fitted model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedModel {
    Linear {
        imputer: Imputer,
        model: LinearModel,
    },
    Forest {
        imputer: Imputer,
        forest: Forest,
    },
    Merf {
        imputer: Imputer,
        model: MerfModel,
        clusters: MerfClusterSource,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedDocument {
    pub version: u32,
    pub name: String,
    pub n_features: usize,
    pub model: SavedModel,
}

impl SavedDocument {
    pub fn new(name: &str, n_features: usize, model: &dyn FittedModel) -> Self {
        Self {
            version: SAVED_MODEL_VERSION,
            name: name.to_string(),
            n_features,
            model: model.saved(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SavedDocument = serde_json::from_str(text)?;
        if doc.version != SAVED_MODEL_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported model file version {}",
                doc.version
            )));
        }
        Ok(doc)
    }

    pub fn into_fitted(self) -> Box<dyn FittedModel> {
        strategies::restore(self.model)
    }
}

/// Name → strategy table.
pub struct Registry {
    entries: BTreeMap<String, Box<dyn ModelStrategy>>,
    order: Vec<String>,
}

fn normalise(name: &str) -> String {
    name.trim()
        .to_ascii_lowercase()
        .replace("&", "_")
        .replace(['-', ' '], "_")
        .replace("__", "_")
        .replace("_and_", "_")
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    /// `linear`, `rf`, `merf_age`, `merf_bmi`, `merf_age_bmi`, `merf_cluster`.
    pub fn builtin() -> Self {
        use crate::merf::ClusterMode;
        let mut r = Self::empty();
        r.register(Box::new(LinearStrategy));
        r.register(Box::new(ForestStrategy));
        r.register(Box::new(MerfStrategy::demographic(ClusterMode::Age)));
        r.register(Box::new(MerfStrategy::demographic(ClusterMode::Bmi)));
        r.register(Box::new(MerfStrategy::demographic(ClusterMode::AgeAndBmi)));
        r.register(Box::new(MerfStrategy::labelled()));
        r
    }

    /// Adds or replaces a strategy under its own name.
    pub fn register(&mut self, strategy: Box<dyn ModelStrategy>) {
        let key = normalise(strategy.name());
        if self.entries.insert(key.clone(), strategy).is_none() {
            self.order.push(key);
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn ModelStrategy> {
        let key = match normalise(name).as_str() {
            "random_forest" | "forest" => "rf".to_string(),
            "linear_regression" | "ridge" => "linear".to_string(),
            other => other.to_string(),
        };
        self.entries
            .get(&key)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    /// Registered names in registration order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    /// The five comparison rows of the reference table.
    pub const TABLE_MODELS: [&'static str; 5] =
        ["linear", "rf", "merf_age", "merf_bmi", "merf_age_bmi"];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_alias() {
        let r = Registry::builtin();
        assert_eq!(r.get("RF").unwrap().name(), "rf");
        assert_eq!(r.get("MERF_AGE&BMI").unwrap().name(), "merf_age_bmi");
        assert_eq!(r.get("merf-age-and-bmi").unwrap().name(), "merf_age_bmi");
        assert!(matches!(r.get("svm"), Err(Error::UnknownModel(_))));
        assert_eq!(r.names().count(), 6);
        for n in Registry::TABLE_MODELS {
            assert!(r.get(n).is_ok());
        }
    }
}
