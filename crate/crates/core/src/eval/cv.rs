use serde::{Deserialize, Serialize};

use super::folds::{kfold, kfold_by_subject, FoldAssignment, SplitMode};
use super::metrics::{metrics, pearson, MeanStd, MetricSet};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ingest::SubjectTable;
use crate::models::{FitContext, FittedModel, MixedDiagnostics, ModelSettings, ModelStrategy};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvSettings {
    pub k: usize,
    pub seed: u64,
    pub split: SplitMode,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 0,
            split: SplitMode::Record,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: MetricSet,
    pub mixed: Option<MixedDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: String,
    pub label: String,
    pub settings: CvSettings,
    pub n: usize,
    pub folds: Vec<FoldReport>,
    pub rmse: MeanStd,
    pub mae: MeanStd,
    /// Over folds with at least one nonzero target.
    pub mape: Option<MeanStd>,
    /// Pooled over all out-of-fold predictions; `None` if degenerate.
    pub corr: Option<f64>,
    /// Out-of-fold prediction per point.
    pub predictions: Vec<f64>,
    /// Mean of the per-fold importance vectors, renormalised.
    pub importance: Option<Vec<f64>>,
}

fn assign(data: &Dataset, cv: &CvSettings) -> Result<FoldAssignment> {
    match cv.split {
        SplitMode::Record => kfold(data.len(), cv.k, cv.seed),
        SplitMode::Subject => kfold_by_subject(&data.subject_ids, cv.k, cv.seed),
    }
}

pub fn cross_validate(
    data: &Dataset,
    strategy: &dyn ModelStrategy,
    settings: &ModelSettings,
    subjects: Option<&SubjectTable>,
    cv: &CvSettings,
) -> Result<CvReport> {
    cross_validate_with(data, strategy, settings, subjects, cv, |_, _, _| {})
}

/// As [`cross_validate`], handing each fold's training set and fitted model
/// to `inspect` before prediction.
pub fn cross_validate_with(
    data: &Dataset,
    strategy: &dyn ModelStrategy,
    settings: &ModelSettings,
    subjects: Option<&SubjectTable>,
    cv: &CvSettings,
    mut inspect: impl FnMut(usize, &Dataset, &dyn FittedModel),
) -> Result<CvReport> {
    if strategy.requires_demographics() {
        let table = subjects.ok_or_else(|| {
            Error::InvalidInput(format!(
                "model `{}` needs subject demographics",
                strategy.name()
            ))
        })?;
        if let Some(missing) = data.subject_ids.iter().find(|s| table.get(s).is_none()) {
            return Err(Error::MissingDemographics(missing.clone()));
        }
    }
    let folds = assign(data, cv)?;
    let mut predictions = vec![f64::NAN; data.len()];
    let mut fold_reports = Vec::with_capacity(cv.k);
    let mut importance_sum: Option<Vec<f64>> = None;

    for f in 0..cv.k {
        let (train_idx, test_idx) = folds.split(f);
        let train = data.subset(&train_idx);
        let test = data.subset(&test_idx);
        let ctx = FitContext {
            settings,
            subjects,
            seed: derive_seed(cv.seed, f as u64),
        };
        let model = strategy.fit(&train, &ctx)?;
        inspect(f, &train, model.as_ref());
        let yhat = model.predict(&test, subjects)?;
        for (&i, &p) in test_idx.iter().zip(&yhat) {
            predictions[i] = p;
        }
        if let Some(imp) = model.importance() {
            let acc = importance_sum.get_or_insert_with(|| vec![0.0; imp.len()]);
            acc.iter_mut().zip(imp).for_each(|(a, b)| *a += b);
        }
        let m = metrics(&test.y, &yhat)?;
        log::info!(
            "{} fold {f}: rmse={:.4} mae={:.4} (train {}, test {})",
            strategy.name(),
            m.rmse,
            m.mae,
            train.len(),
            test.len()
        );
        fold_reports.push(FoldReport {
            fold: f,
            n_train: train.len(),
            n_test: test.len(),
            metrics: m,
            mixed: model.mixed_diagnostics(),
        });
    }

    let collect = |g: fn(&MetricSet) -> Option<f64>| -> Vec<f64> {
        fold_reports.iter().filter_map(|r| g(&r.metrics)).collect()
    };
    let importance = importance_sum.map(|mut v| {
        let total: f64 = v.iter().sum();
        if total > 0.0 {
            v.iter_mut().for_each(|x| *x /= total);
        }
        v
    });
    Ok(CvReport {
        model: strategy.name().to_string(),
        label: strategy.label().to_string(),
        settings: *cv,
        n: data.len(),
        rmse: MeanStd::of(&collect(|m| Some(m.rmse))).expect("k >= 2 folds"),
        mae: MeanStd::of(&collect(|m| Some(m.mae))).expect("k >= 2 folds"),
        mape: MeanStd::of(&collect(|m| m.mape)),
        corr: pearson(&data.y, &predictions).ok(),
        folds: fold_reports,
        predictions,
        importance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::ForestParams;
    use crate::models::Registry;
    use crate::synth::{gen_clustered, ClusteredSpec};

    fn settings() -> ModelSettings {
        ModelSettings {
            forest: ForestParams {
                n_trees: 30,
                ..ForestParams::default()
            },
            ..ModelSettings::default()
        }
    }

    fn data() -> Dataset {
        gen_clustered(&ClusteredSpec {
            n_clusters: 5,
            per_cluster: 20,
            ..ClusteredSpec::default()
        })
        .unwrap()
        .dataset
    }

    #[test]
    fn same_seed_same_report() {
        let reg = Registry::builtin();
        let d = data();
        let cv = CvSettings {
            seed: 4,
            ..CvSettings::default()
        };
        let a =
            cross_validate(&d, reg.get("merf_cluster").unwrap(), &settings(), None, &cv).unwrap();
        let b =
            cross_validate(&d, reg.get("merf_cluster").unwrap(), &settings(), None, &cv).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.predictions.iter().all(|p| p.is_finite()));
        assert_eq!(a.folds.len(), 5);
        assert!(a.folds.iter().all(|f| f.mixed.is_some()));
    }

    #[test]
    fn demographic_models_need_subjects() {
        let reg = Registry::builtin();
        let r = cross_validate(
            &data(),
            reg.get("merf_age").unwrap(),
            &settings(),
            None,
            &CvSettings::default(),
        );
        assert!(r.is_err());
    }
}
