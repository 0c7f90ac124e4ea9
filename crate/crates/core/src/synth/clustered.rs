use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::{N_BASE, N_FEATURES, N_SUMMARY};
use crate::rng;

/// Columns entering the fixed effect.
pub const N_INFORMATIVE: usize = 5;
/// Pure-noise columns appended after the informative ones.
pub const N_NOISE: usize = 5;

/// Friedman #1: `10 sin(π x₁x₂) + 20 (x₃ − ½)² + 10 x₄ + 5 x₅`.
pub fn friedman1(x: &[f64]) -> f64 {
    10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
}

fn linear(x: &[f64]) -> f64 {
    10.0 * x[0] + 5.0 * x[1] - 3.0 * x[2] + 2.0 * x[3] + x[4]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedEffect {
    Friedman1,
    Linear,
}

impl FixedEffect {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            FixedEffect::Friedman1 => friedman1(x),
            FixedEffect::Linear => linear(x),
        }
    }
}

impl fmt::Display for FixedEffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixedEffect::Friedman1 => "friedman1",
            FixedEffect::Linear => "linear",
        })
    }
}

impl FromStr for FixedEffect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "friedman1" | "friedman" => Ok(FixedEffect::Friedman1),
            "linear" => Ok(FixedEffect::Linear),
            _ => Err(Error::InvalidInput(format!("unknown fixed effect `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteredSpec {
    pub n_clusters: usize,
    pub per_cluster: usize,
    pub fixed_effect: FixedEffect,
    pub sigma_b: f64,
    pub sigma_e: f64,
    pub seed: u64,
}

impl Default for ClusteredSpec {
    fn default() -> Self {
        Self {
            n_clusters: 20,
            per_cluster: 40,
            fixed_effect: FixedEffect::Friedman1,
            sigma_b: 2.0,
            sigma_e: 1.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteredTruth {
    pub spec: ClusteredSpec,
    /// Per-cluster intercepts, recentred to mean zero.
    pub intercepts: Vec<f64>,
    pub sigma_b2: f64,
    pub sigma_e2: f64,
    /// Noiseless `f(x)` per point.
    pub fixed_effect: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ClusteredData {
    /// `cluster` column holds `c000`, `c001`, ...; subject ids equal it.
    pub dataset: Dataset,
    pub clusters: Vec<usize>,
    pub truth: ClusteredTruth,
}

pub fn cluster_label(c: usize) -> String {
    format!("c{c:03}")
}

pub fn gen_clustered(spec: &ClusteredSpec) -> Result<ClusteredData> {
    if spec.n_clusters == 0 || spec.per_cluster == 0 {
        return Err(Error::InvalidInput(
            "need at least one cluster and one point per cluster".into(),
        ));
    }
    if !(spec.sigma_b >= 0.0) || !(spec.sigma_e > 0.0) {
        return Err(Error::InvalidInput(
            "require sigma_b >= 0 and sigma_e > 0".into(),
        ));
    }
    let mut rng = rng::rng(spec.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut b: Vec<f64> = (0..spec.n_clusters)
        .map(|_| spec.sigma_b * std_normal.sample(&mut rng))
        .collect();
    let mean_b = b.iter().sum::<f64>() / b.len() as f64;
    b.iter_mut().for_each(|v| *v -= mean_b);
    if spec.sigma_b == 0.0 {
        b.iter_mut().for_each(|v| *v = 0.0);
    }

    let n = spec.n_clusters * spec.per_cluster;
    let p = N_INFORMATIVE + N_NOISE;
    let mut data = Vec::with_capacity(n * p);
    let mut fixed = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut clusters = Vec::with_capacity(n);
    for c in 0..spec.n_clusters {
        for _ in 0..spec.per_cluster {
            let row: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
            let f = spec.fixed_effect.eval(&row);
            let eps = spec.sigma_e * std_normal.sample(&mut rng);
            data.extend(row);
            fixed.push(f);
            y.push(f + b[c] + eps);
            clusters.push(c);
        }
    }
    let labels: Vec<String> = clusters.iter().map(|&c| cluster_label(c)).collect();
    let dataset = Dataset::new(
        labels.clone(),
        (0..n as i64).collect(),
        y,
        DMatrix::from_row_slice(n, p, &data),
        Some(labels),
    )?;
    Ok(ClusteredData {
        dataset,
        clusters,
        truth: ClusteredTruth {
            spec: *spec,
            intercepts: b,
            sigma_b2: spec.sigma_b * spec.sigma_b,
            sigma_e2: spec.sigma_e * spec.sigma_e,
            fixed_effect: fixed,
        },
    })
}

/// Full-width feature matrix in which only the statistics of base feature
/// `source` carry signal: they share a latent `z`, and `y = 2z + noise`.
/// Every other column is independent standard normal noise.
pub fn gen_single_source(n: usize, source: usize, seed: u64) -> Result<Dataset> {
    if source >= N_BASE {
        return Err(Error::InvalidInput(format!("no base feature {source}")));
    }
    let range = source * N_SUMMARY..(source + 1) * N_SUMMARY;
    let mut rng = rng::rng(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = DMatrix::zeros(n, N_FEATURES);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let z = std_normal.sample(&mut rng);
        for j in 0..N_FEATURES {
            let noise = std_normal.sample(&mut rng);
            x[(i, j)] = if range.contains(&j) {
                z + 0.3 * noise
            } else {
                noise
            };
        }
        y.push(2.0 * z + 0.5 * std_normal.sample(&mut rng));
    }
    Dataset::new(
        (0..n).map(|i| format!("s{:02}", i % 21)).collect(),
        (0..n as i64).collect(),
        y,
        x,
        None,
    )
}
