use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{FitContext, FittedModel, Imputer, MixedDiagnostics, ModelStrategy, SavedModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::{fit_linear_baseline, fit_standardized_ridge, LinearModel};
use crate::forest::{fit_forest, Forest};
use crate::ingest::SubjectTable;
use crate::merf::{fit_merf, ClusterMode, ClusterScheme, MerfModel};

pub struct LinearStrategy;

impl ModelStrategy for LinearStrategy {
    fn name(&self) -> &str {
        "linear"
    }

    fn label(&self) -> &str {
        "Linear Regression"
    }

    fn fit(&self, train: &Dataset, ctx: &FitContext<'_>) -> Result<Box<dyn FittedModel>> {
        let imputer = Imputer::fit(&train.x);
        let x = imputer.apply(&train.x)?;
        let lambda = ctx.settings.ridge_lambda;
        let model = if ctx.settings.standardize_linear {
            fit_standardized_ridge(&x, &train.y, lambda)?
        } else {
            fit_linear_baseline(&x, &train.y, lambda)?
        };
        Ok(Box::new(FittedLinear { imputer, model }))
    }
}

struct FittedLinear {
    imputer: Imputer,
    model: LinearModel,
}

impl FittedModel for FittedLinear {
    fn predict(&self, data: &Dataset, _: Option<&SubjectTable>) -> Result<Vec<f64>> {
        self.model.predict_matrix(&self.imputer.apply(&data.x)?)
    }

    fn importance(&self) -> Option<&[f64]> {
        None
    }

    fn imputer(&self) -> &Imputer {
        &self.imputer
    }

    fn saved(&self) -> SavedModel {
        SavedModel::Linear {
            imputer: self.imputer.clone(),
            model: self.model.clone(),
        }
    }
}

pub struct ForestStrategy;

impl ModelStrategy for ForestStrategy {
    fn name(&self) -> &str {
        "rf"
    }

    fn label(&self) -> &str {
        "Random Forest"
    }

    fn fit(&self, train: &Dataset, ctx: &FitContext<'_>) -> Result<Box<dyn FittedModel>> {
        let imputer = Imputer::fit(&train.x);
        let x = imputer.apply(&train.x)?;
        let forest = fit_forest(&x, &train.y, &ctx.settings.forest_params(ctx.seed))?;
        Ok(Box::new(FittedForest { imputer, forest }))
    }
}

struct FittedForest {
    imputer: Imputer,
    forest: Forest,
}

impl FittedModel for FittedForest {
    fn predict(&self, data: &Dataset, _: Option<&SubjectTable>) -> Result<Vec<f64>> {
        self.forest.predict_matrix(&self.imputer.apply(&data.x)?)
    }

    fn importance(&self) -> Option<&[f64]> {
        Some(self.forest.importance())
    }

    fn imputer(&self) -> &Imputer {
        &self.imputer
    }

    fn saved(&self) -> SavedModel {
        SavedModel::Forest {
            imputer: self.imputer.clone(),
            forest: self.forest.clone(),
        }
    }
}

/// Where a mixed-effects model gets the cluster of each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum MerfClusterSource {
    /// Demographic bins; the scheme is stored in the model.
    Demographic,
    /// The dataset's `cluster` column, with label → id.
    Labels { ids: BTreeMap<String, usize> },
}

pub struct MerfStrategy {
    mode: Option<ClusterMode>,
    name: &'static str,
    label: &'static str,
}

impl MerfStrategy {
    pub fn demographic(mode: ClusterMode) -> Self {
        let (name, label) = match mode {
            ClusterMode::Age => ("merf_age", "MERF Age"),
            ClusterMode::Bmi => ("merf_bmi", "MERF BMI"),
            ClusterMode::AgeAndBmi => ("merf_age_bmi", "MERF Age&BMI"),
        };
        Self {
            mode: Some(mode),
            name,
            label,
        }
    }

    /// Clusters taken verbatim from the dataset's `cluster` column.
    pub fn labelled() -> Self {
        Self {
            mode: None,
            name: "merf_cluster",
            label: "MERF Cluster",
        }
    }
}

fn demographic_clusters(
    data: &Dataset,
    subjects: &SubjectTable,
    scheme: &ClusterScheme,
) -> Vec<Option<usize>> {
    data.subject_ids
        .iter()
        .map(|s| subjects.get(s).map(|r| scheme.cluster_of(r)))
        .collect()
}

fn require_subjects<'a>(subjects: Option<&'a SubjectTable>) -> Result<&'a SubjectTable> {
    subjects.ok_or_else(|| Error::InvalidInput("mixed-effects model needs a subjects table".into()))
}

impl ModelStrategy for MerfStrategy {
    fn name(&self) -> &str {
        self.name
    }

    fn label(&self) -> &str {
        self.label
    }

    fn requires_demographics(&self) -> bool {
        self.mode.is_some()
    }

    fn fit(&self, train: &Dataset, ctx: &FitContext<'_>) -> Result<Box<dyn FittedModel>> {
        let imputer = Imputer::fit(&train.x);
        let x = imputer.apply(&train.x)?;
        let params = ctx.settings.merf_params(ctx.seed);
        let (clusters, scheme, source): (Vec<usize>, _, _) = match self.mode {
            Some(mode) => {
                let table = require_subjects(ctx.subjects)?;
                let ids: BTreeSet<&str> = train.subject_ids.iter().map(String::as_str).collect();
                let records = ids
                    .iter()
                    .map(|id| {
                        table
                            .get(id)
                            .ok_or_else(|| Error::MissingDemographics(id.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let scheme = ClusterScheme::fit(mode, ctx.settings.n_bins, records)?;
                let clusters = demographic_clusters(train, table, &scheme)
                    .into_iter()
                    .map(|c| c.expect("checked above"))
                    .collect();
                (clusters, Some(scheme), MerfClusterSource::Demographic)
            }
            None => {
                let labels = train
                    .clusters
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("dataset has no `cluster` column".into()))?;
                let distinct: BTreeSet<&String> = labels.iter().collect();
                let ids: BTreeMap<String, usize> = distinct
                    .into_iter()
                    .enumerate()
                    .map(|(i, l)| (l.clone(), i))
                    .collect();
                let clusters = labels.iter().map(|l| ids[l]).collect();
                (clusters, None, MerfClusterSource::Labels { ids })
            }
        };
        let mut model = fit_merf(&x, &train.y, &clusters, &params)?;
        model.scheme = scheme;
        Ok(Box::new(FittedMerf {
            imputer,
            model,
            source,
        }))
    }
}

struct FittedMerf {
    imputer: Imputer,
    model: MerfModel,
    source: MerfClusterSource,
}

impl FittedMerf {
    fn clusters_of(
        &self,
        data: &Dataset,
        subjects: Option<&SubjectTable>,
    ) -> Result<Vec<Option<usize>>> {
        Ok(match &self.source {
            MerfClusterSource::Demographic => {
                let scheme =
                    self.model.scheme.as_ref().ok_or_else(|| {
                        Error::InvalidInput("model lacks its cluster scheme".into())
                    })?;
                demographic_clusters(data, require_subjects(subjects)?, scheme)
            }
            MerfClusterSource::Labels { ids } => match &data.clusters {
                Some(labels) => labels.iter().map(|l| ids.get(l).copied()).collect(),
                None => vec![None; data.len()],
            },
        })
    }
}

impl FittedModel for FittedMerf {
    fn predict(&self, data: &Dataset, subjects: Option<&SubjectTable>) -> Result<Vec<f64>> {
        let clusters = self.clusters_of(data, subjects)?;
        self.model
            .predict_matrix(&self.imputer.apply(&data.x)?, &clusters)
    }

    fn importance(&self) -> Option<&[f64]> {
        Some(self.model.forest.importance())
    }

    fn mixed_diagnostics(&self) -> Option<MixedDiagnostics> {
        let m = &self.model;
        Some(MixedDiagnostics {
            sigma2: m.sigma2,
            sigma_b2: m.sigma_b2,
            iterations: m.iterations(),
            converged: m.converged,
            initial_gll: m.trace.first().map_or(f64::NAN, |s| s.gll),
            final_gll: m.trace.last().map_or(f64::NAN, |s| s.gll),
            n_clusters: m.intercepts.len(),
            max_abs_intercept: m.intercepts.values().fold(0.0, |a, b| a.max(b.abs())),
        })
    }

    fn imputer(&self) -> &Imputer {
        &self.imputer
    }

    fn saved(&self) -> SavedModel {
        SavedModel::Merf {
            imputer: self.imputer.clone(),
            model: self.model.clone(),
            clusters: self.source.clone(),
        }
    }
}

pub(super) fn restore(saved: SavedModel) -> Box<dyn FittedModel> {
    match saved {
        SavedModel::Linear { imputer, model } => Box::new(FittedLinear { imputer, model }),
        SavedModel::Forest { imputer, forest } => Box::new(FittedForest { imputer, forest }),
        SavedModel::Merf {
            imputer,
            model,
            clusters,
        } => Box::new(FittedMerf {
            imputer,
            model,
            source: clusters,
        }),
    }
}
