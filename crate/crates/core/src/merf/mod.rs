//! Mixed-effects random forest: `y = f(X) + b_cluster + ε`.
//!
//! `f` is a [`Forest`], `b` a random intercept per cluster drawn from
//! `N(0, σ_b²)`, and `ε ~ N(0, σ²)`. Fitting alternates between refitting the
//! forest on `y − b` and re-estimating `b`, `σ²` and `σ_b²` in closed form,
//! until the generalised log-likelihood settles.

mod algebra;
mod cluster;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use algebra::{blup, estep, gll, update_variance, VARIANCE_FLOOR};
pub use cluster::{assign_clusters, ClusterMode, ClusterScheme};

use crate::error::{Error, Result};
use crate::forest::{self, fit_forest, fit_forest_oob, Forest, ForestParams};

pub const MERF_FORMAT_VERSION: u32 = 1;

/// Which forest predictions the E-step residuals are taken from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSource {
    /// Out-of-bag predictions (in-sample when bootstrapping is off).
    #[default]
    OutOfBag,
    /// In-sample predictions of the whole forest.
    InSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MerfParams {
    pub forest: ForestParams,
    pub residuals: ResidualSource,
    pub max_em_iters: usize,
    pub gll_rel_tol: f64,
    pub initial_sigma2: f64,
    pub initial_sigma_b2: f64,
}

impl Default for MerfParams {
    fn default() -> Self {
        Self {
            forest: ForestParams::default(),
            residuals: ResidualSource::OutOfBag,
            max_em_iters: 50,
            gll_rel_tol: 1e-4,
            initial_sigma2: 1.0,
            initial_sigma_b2: 1.0,
        }
    }
}

impl MerfParams {
    fn validate(&self) -> Result<()> {
        if self.max_em_iters == 0 {
            return Err(Error::InvalidInput(
                "max_em_iters must be at least 1".into(),
            ));
        }
        if !(self.gll_rel_tol > 0.0) {
            return Err(Error::InvalidInput("gll_rel_tol must be positive".into()));
        }
        if !(self.initial_sigma2 > 0.0) || !(self.initial_sigma_b2 >= 0.0) {
            return Err(Error::InvalidInput("initial variances out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmStep {
    pub gll: f64,
    pub sigma2: f64,
    pub sigma_b2: f64,
    pub max_delta_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MerfModel {
    pub version: u32,
    pub params: MerfParams,
    pub forest: Forest,
    /// Stored as `[cluster, b]` pairs: integer map keys do not survive being
    /// nested in internally tagged enums.
    #[serde(with = "pairs")]
    pub intercepts: BTreeMap<usize, f64>,
    pub sigma2: f64,
    pub sigma_b2: f64,
    /// Present when cluster ids come from demographic bins.
    pub scheme: Option<ClusterScheme>,
    pub trace: Vec<EmStep>,
    pub converged: bool,
    /// Forest predictions on the training rows the final residuals came
    /// from (out-of-bag or in-sample, per [`ResidualSource`]).
    pub train_fitted: Vec<f64>,
}

mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, f64>, D::Error> {
        Ok(Vec::<(usize, f64)>::deserialize(d)?.into_iter().collect())
    }
}

fn intercept_of(b: &BTreeMap<usize, f64>, c: usize) -> f64 {
    b.get(&c).copied().unwrap_or(0.0)
}

pub fn fit_merf(
    x: &DMatrix<f64>,
    y: &[f64],
    clusters: &[usize],
    params: &MerfParams,
) -> Result<MerfModel> {
    params.validate()?;
    forest::check_finite(x, y)?;
    if clusters.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: clusters.len(),
        });
    }

    let (mut sigma2, mut sigma_b2) = (params.initial_sigma2, params.initial_sigma_b2);
    let mut b: BTreeMap<usize, f64> = clusters.iter().map(|&c| (c, 0.0)).collect();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut forest = None;
    let mut residuals = Vec::new();
    let mut fitted = Vec::new();

    for iter in 0..params.max_em_iters {
        let target: Vec<f64> = y
            .iter()
            .zip(clusters)
            .map(|(v, &c)| v - intercept_of(&b, c))
            .collect();
        let (mut f, mut fx) = match params.residuals {
            ResidualSource::OutOfBag => fit_forest_oob(x, &target, &params.forest)?,
            ResidualSource::InSample => {
                let f = fit_forest(x, &target, &params.forest)?;
                let fx = f.predict_matrix(x)?;
                (f, fx)
            }
        };
        // The intercepts' common mean is not identified against the forest
        // level, and a small bias in the fitted values (OOB ones especially)
        // would otherwise accumulate there through the shrinkage. Pin it: the
        // forest carries the global level, residuals average zero.
        let level = y.iter().zip(&fx).map(|(v, p)| v - p).sum::<f64>() / y.len() as f64;
        f.offset += level;
        fx.iter_mut().for_each(|p| *p += level);
        residuals = y.iter().zip(&fx).map(|(v, p)| v - p).collect();
        fitted = fx;

        let b_new = estep(&residuals, clusters, sigma2, sigma_b2);
        let (s2, s2b) = update_variance(&residuals, &b_new, clusters, sigma2, sigma_b2);
        let g = gll(&residuals, &b_new, clusters, s2, s2b);
        let max_delta_b = b_new
            .iter()
            .map(|(c, v)| (v - intercept_of(&b, *c)).abs())
            .fold(0.0, f64::max);
        log::debug!("em {iter}: gll={g:.6} s2={s2:.6} s2b={s2b:.6} max|db|={max_delta_b:.3e}");

        let previous = trace.last().map(|s: &EmStep| s.gll);
        trace.push(EmStep {
            gll: g,
            sigma2: s2,
            sigma_b2: s2b,
            max_delta_b,
        });
        b = b_new;
        sigma2 = s2;
        sigma_b2 = s2b;
        forest = Some(f);
        if let Some(prev) = previous {
            if (g - prev).abs() / (prev.abs() + 1e-12) < params.gll_rel_tol {
                converged = true;
                break;
            }
        }
    }

    // Re-solve the intercepts at the final variances so that every b_i is
    // exactly the shrunken mean residual of the returned forest.
    let b = estep(&residuals, clusters, sigma2, sigma_b2);
    Ok(MerfModel {
        version: MERF_FORMAT_VERSION,
        params: *params,
        forest: forest.expect("at least one EM iteration"),
        intercepts: b,
        sigma2,
        sigma_b2,
        scheme: None,
        trace,
        converged,
        train_fitted: fitted,
    })
}

impl MerfModel {
    /// `f(x) + b_cluster` for a known cluster, `f(x)` otherwise.
    pub fn predict(&self, x: &[f64], cluster: Option<usize>) -> Result<f64> {
        let fx = self.forest.predict(x)?;
        Ok(match cluster.and_then(|c| self.intercepts.get(&c)) {
            Some(b) => fx + b,
            None => fx,
        })
    }

    pub fn predict_matrix(&self, x: &DMatrix<f64>, clusters: &[Option<usize>]) -> Result<Vec<f64>> {
        if clusters.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: clusters.len(),
            });
        }
        let fx = self.forest.predict_matrix(x)?;
        Ok(fx
            .into_iter()
            .zip(clusters)
            .map(|(f, c)| match c.and_then(|c| self.intercepts.get(&c)) {
                Some(b) => f + b,
                None => f,
            })
            .collect())
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: MerfModel = serde_json::from_str(text)?;
        if model.version != MERF_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported MERF format version {}",
                model.version
            )));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn params(n_trees: usize) -> MerfParams {
        MerfParams {
            forest: ForestParams {
                n_trees,
                seed: 3,
                ..ForestParams::default()
            },
            ..MerfParams::default()
        }
    }

    fn clustered(
        q: usize,
        per: usize,
        sigma_b: f64,
        seed: u64,
    ) -> (DMatrix<f64>, Vec<f64>, Vec<usize>) {
        let mut rng = crate::rng::rng(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let b: Vec<f64> = (0..q).map(|_| sigma_b * noise.sample(&mut rng)).collect();
        let n = q * per;
        let x = DMatrix::from_fn(n, 3, |_, _| rng.random::<f64>());
        let clusters: Vec<usize> = (0..n).map(|i| i / per).collect();
        let y = (0..n)
            .map(|i| 5.0 * x[(i, 0)] + b[clusters[i]] + 0.5 * noise.sample(&mut rng))
            .collect();
        (x, y, clusters)
    }

    #[test]
    fn intercept_identity_holds_at_fit() {
        let (x, y, c) = clustered(6, 15, 2.0, 1);
        let p = params(30);
        let m = fit_merf(&x, &y, &c, &p).unwrap();
        let fx = &m.train_fitted;
        for (&cl, &b) in &m.intercepts {
            let r: Vec<f64> = (0..y.len())
                .filter(|&i| c[i] == cl)
                .map(|i| y[i] - fx[i])
                .collect();
            let rbar = r.iter().sum::<f64>() / r.len() as f64;
            assert!((b - blup(r.len(), rbar, m.sigma2, m.sigma_b2)).abs() < 1e-8);
        }
        assert!(m.sigma2 > 0.0 && m.sigma_b2 >= 0.0);
        assert!(m.iterations() <= 50 && m.iterations() == m.trace.len());
    }

    #[test]
    fn zero_random_effect_is_a_fixed_point() {
        // b stays at zero, so the forest is the plain one with its level
        // recalibrated to the mean out-of-bag residual
        let (x, y, c) = clustered(5, 10, 1.0, 2);
        let p = MerfParams {
            initial_sigma_b2: 0.0,
            ..params(20)
        };
        let m = fit_merf(&x, &y, &c, &p).unwrap();
        assert!(m.intercepts.values().all(|&b| b == 0.0));
        assert_eq!(m.sigma_b2, 0.0);
        let (plain, oob) = fit_forest_oob(&x, &y, &p.forest).unwrap();
        assert_eq!(m.forest.trees, plain.trees);
        let level = y.iter().zip(&oob).map(|(a, b)| a - b).sum::<f64>() / y.len() as f64;
        assert_eq!(m.forest.offset, plain.offset + level);
    }

    #[test]
    fn forest_carries_the_global_level() {
        // a constant added to every target must end up in the forest, not
        // in a common shift of the intercepts
        let (x, y, c) = clustered(6, 15, 1.5, 9);
        let y: Vec<f64> = y.iter().map(|v| v + 40.0).collect();
        let m = fit_merf(&x, &y, &c, &params(20)).unwrap();
        let mean_r = y.iter().zip(&m.train_fitted).map(|(a, b)| a - b).sum::<f64>() / y.len() as f64;
        assert!(mean_r.abs() < 1e-9, "mean residual {mean_r}");
        let weighted_b: f64 = c.iter().map(|k| m.intercepts[k]).sum::<f64>() / c.len() as f64;
        assert!(weighted_b.abs() < 0.1, "intercepts drifted by {weighted_b}");
    }

    #[test]
    fn unknown_cluster_falls_back_to_forest() {
        let (x, y, c) = clustered(4, 10, 2.0, 3);
        let mut m = fit_merf(&x, &y, &c, &params(20)).unwrap();
        let row = [0.3, 0.6, 0.9];
        let f = m.forest.predict(&row).unwrap();
        assert_eq!(m.predict(&row, Some(999)).unwrap().to_bits(), f.to_bits());
        assert_eq!(m.predict(&row, None).unwrap().to_bits(), f.to_bits());
        m.intercepts.insert(0, 0.5);
        assert_eq!(m.predict(&row, Some(0)).unwrap(), f + 0.5);
        assert!(m.predict(&[0.1], None).is_err());
    }

    #[test]
    fn singleton_clusters_terminate() {
        let (x, y, _) = clustered(1, 30, 0.0, 4);
        let c: Vec<usize> = (0..30).collect();
        let m = fit_merf(&x, &y, &c, &params(10)).unwrap();
        assert!(m.sigma2.is_finite() && m.sigma_b2.is_finite());
        assert!(m.intercepts.values().all(|b| b.is_finite()));
    }

    #[test]
    fn recovers_cluster_offsets() {
        let (x, y, c) = clustered(10, 30, 2.0, 5);
        let m = fit_merf(&x, &y, &c, &params(50)).unwrap();
        assert!(m.sigma_b2 > 1.0 && m.sigma_b2 < 10.0, "s2b {}", m.sigma_b2);
    }

    #[test]
    fn json_round_trip() {
        let (x, y, c) = clustered(3, 10, 1.0, 6);
        let m = fit_merf(&x, &y, &c, &params(5)).unwrap();
        assert_eq!(MerfModel::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_input() {
        let (x, mut y, c) = clustered(2, 5, 1.0, 7);
        assert!(fit_merf(&x, &y, &c[..3], &params(5)).is_err());
        y[0] = f64::INFINITY;
        assert!(fit_merf(&x, &y, &c, &params(5)).is_err());
    }
}
