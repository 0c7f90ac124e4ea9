//! Demographic clusters: quantile bins over age, BMI or both.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::stats;
use crate::ingest::{SubjectRecord, SubjectTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMode {
    Age,
    Bmi,
    AgeAndBmi,
}

impl fmt::Display for ClusterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterMode::Age => "age",
            ClusterMode::Bmi => "bmi",
            ClusterMode::AgeAndBmi => "age_and_bmi",
        })
    }
}

impl FromStr for ClusterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '&'], "_").as_str() {
            "age" => Ok(ClusterMode::Age),
            "bmi" => Ok(ClusterMode::Bmi),
            "age_and_bmi" | "age_bmi" | "age__bmi" => Ok(ClusterMode::AgeAndBmi),
            _ => Err(Error::InvalidInput(format!("unknown cluster mode `{s}`"))),
        }
    }
}

/// Bin edges frozen from a set of training subjects.
///
/// A value falls in bin `#{edges < value}`, so the bins partition the real
/// line and values outside the training range clamp into the end bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterScheme {
    pub mode: ClusterMode,
    pub n_bins: usize,
    pub age_edges: Vec<f64>,
    pub bmi_edges: Vec<f64>,
}

fn quantile_edges(values: &[f64], n_bins: usize) -> Vec<f64> {
    let sorted = stats::sorted(values);
    (1..n_bins)
        .map(|j| stats::percentile_sorted(&sorted, 100.0 * j as f64 / n_bins as f64))
        .collect()
}

fn bin(edges: &[f64], value: f64) -> usize {
    edges.iter().filter(|&&e| e < value).count()
}

impl ClusterScheme {
    /// Learns quantile edges from one value per training subject.
    pub fn fit<'a>(
        mode: ClusterMode,
        n_bins: usize,
        subjects: impl IntoIterator<Item = &'a SubjectRecord>,
    ) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::InvalidInput("n_bins must be at least 1".into()));
        }
        let (ages, bmis): (Vec<f64>, Vec<f64>) = subjects
            .into_iter()
            .map(|s| (f64::from(s.age), s.bmi))
            .unzip();
        if ages.is_empty() {
            return Err(Error::InvalidInput(
                "no training subjects to fit cluster edges".into(),
            ));
        }
        Ok(Self {
            mode,
            n_bins,
            age_edges: quantile_edges(&ages, n_bins),
            bmi_edges: quantile_edges(&bmis, n_bins),
        })
    }

    pub fn n_clusters(&self) -> usize {
        match self.mode {
            ClusterMode::Age | ClusterMode::Bmi => self.n_bins,
            ClusterMode::AgeAndBmi => self.n_bins * self.n_bins,
        }
    }

    pub fn cluster_of(&self, subject: &SubjectRecord) -> usize {
        let age = bin(&self.age_edges, f64::from(subject.age));
        let bmi = bin(&self.bmi_edges, subject.bmi);
        match self.mode {
            ClusterMode::Age => age,
            ClusterMode::Bmi => bmi,
            ClusterMode::AgeAndBmi => age * (self.bmi_edges.len() + 1) + bmi,
        }
    }
}

/// Maps each listed subject to its cluster id.
pub fn assign_clusters<'a>(
    subject_ids: impl IntoIterator<Item = &'a str>,
    table: &SubjectTable,
    scheme: &ClusterScheme,
) -> Result<BTreeMap<String, usize>> {
    subject_ids
        .into_iter()
        .map(|id| {
            let rec = table
                .get(id)
                .ok_or_else(|| Error::MissingDemographics(id.to_string()))?;
            Ok((id.to_string(), scheme.cluster_of(rec)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subj(id: &str, age: u32, bmi: f64) -> SubjectRecord {
        SubjectRecord {
            subject_id: id.into(),
            age,
            bmi,
        }
    }

    fn table() -> SubjectTable {
        [
            subj("a", 25, 20.0),
            subj("b", 40, 24.0),
            subj("c", 60, 31.0),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn three_ages_three_bins() {
        let t = table();
        let s = ClusterScheme::fit(ClusterMode::Age, 3, t.iter()).unwrap();
        // edges sit at the 1/3 and 2/3 quantiles: 35 and 46.67
        assert!((s.age_edges[0] - 35.0).abs() < 1e-12);
        let m = assign_clusters(["a", "b", "c"], &t, &s).unwrap();
        assert_eq!((m["a"], m["b"], m["c"]), (0, 1, 2));
    }

    #[test]
    fn single_bin_is_one_cluster() {
        let t = table();
        let s = ClusterScheme::fit(ClusterMode::AgeAndBmi, 1, t.iter()).unwrap();
        let m = assign_clusters(["a", "b", "c"], &t, &s).unwrap();
        assert!(m.values().all(|&c| c == 0));
        assert_eq!(s.n_clusters(), 1);
    }

    #[test]
    fn joint_ids_cover_grid() {
        let t = table();
        let s = ClusterScheme::fit(ClusterMode::AgeAndBmi, 3, t.iter()).unwrap();
        for age in [1, 30, 45, 129] {
            for bmi in [6.0, 22.0, 28.0, 99.0] {
                assert!(s.cluster_of(&subj("x", age, bmi)) < 9);
            }
        }
        let m = assign_clusters(["a", "b", "c"], &t, &s).unwrap();
        assert_eq!((m["a"], m["b"], m["c"]), (0, 4, 8));
    }

    #[test]
    fn unseen_values_clamp() {
        let t = table();
        let s = ClusterScheme::fit(ClusterMode::Bmi, 3, t.iter()).unwrap();
        assert_eq!(s.cluster_of(&subj("x", 50, 5.5)), 0);
        assert_eq!(s.cluster_of(&subj("x", 50, 90.0)), 2);
    }

    #[test]
    fn missing_subject_is_an_error() {
        let t = table();
        let s = ClusterScheme::fit(ClusterMode::Age, 3, t.iter()).unwrap();
        assert!(matches!(
            assign_clusters(["zz"], &t, &s),
            Err(Error::MissingDemographics(_))
        ));
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [ClusterMode::Age, ClusterMode::Bmi, ClusterMode::AgeAndBmi] {
            assert_eq!(m.to_string().parse::<ClusterMode>().unwrap(), m);
        }
        assert_eq!(
            "AGE&BMI".parse::<ClusterMode>().unwrap(),
            ClusterMode::AgeAndBmi
        );
    }
}
