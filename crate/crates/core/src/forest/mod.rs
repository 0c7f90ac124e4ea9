//! Random-forest regressor with impurity-based feature importance.
//!
//! Trees are CART regression trees grown on bootstrap resamples. Each tree
//! draws from its own RNG stream seeded from `(seed, tree_index)`, so a forest
//! is bit-identical for a given seed whatever the rayon pool size.
//!
//! Targets are fitted relative to the first training response (`offset`).
//! Splits and leaves therefore only see differences between responses: adding
//! an exactly representable constant to `y` leaves every tree and the
//! importance vector unchanged and moves only the offset.

mod split;
mod tree;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use split::{best_split, Split};
pub use tree::{Node, Tree};

use crate::error::{Error, Result};
use crate::rng;

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `max(1, p / 3)`.
    pub mtry: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 300,
            mtry: None,
            min_samples_leaf: 5,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry.unwrap_or((p / 3).max(1))
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidInput("n_trees must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidInput(
                "min_samples_leaf must be at least 1".into(),
            ));
        }
        let mtry = self.resolved_mtry(p);
        if mtry == 0 || mtry > p {
            return Err(Error::InvalidInput(format!("mtry {mtry} outside 1..={p}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub version: u32,
    pub params: ForestParams,
    pub n_features: usize,
    /// Added to the tree average at prediction time.
    pub offset: f64,
    pub trees: Vec<Tree>,
    /// Normalised impurity importance; all zero when no tree ever split.
    pub importance: Vec<f64>,
}

pub(crate) fn check_finite(x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite response at row {i}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    Ok(())
}

/// Row indices sorted by each feature (ties by row index).
fn presort(x: &DMatrix<f64>) -> Vec<Vec<u32>> {
    (0..x.ncols())
        .map(|f| {
            let col = x.column(f);
            let mut order: Vec<u32> = (0..x.nrows() as u32).collect();
            order.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            order
        })
        .collect()
}

pub fn fit_forest(x: &DMatrix<f64>, y: &[f64], params: &ForestParams) -> Result<Forest> {
    fit(x, y, params, false).map(|(f, _)| f)
}

/// Fits a forest and also returns each training row's out-of-bag prediction:
/// the average over trees whose bootstrap sample missed that row. Rows that
/// are in every sample (or all rows, without bootstrapping) fall back to the
/// full-forest prediction.
pub fn fit_forest_oob(
    x: &DMatrix<f64>,
    y: &[f64],
    params: &ForestParams,
) -> Result<(Forest, Vec<f64>)> {
    fit(x, y, params, true).map(|(f, oob)| (f, oob.expect("requested")))
}

fn fit(
    x: &DMatrix<f64>,
    y: &[f64],
    params: &ForestParams,
    want_oob: bool,
) -> Result<(Forest, Option<Vec<f64>>)> {
    if y.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 training rows, got {}",
            y.len()
        )));
    }
    check_finite(x, y)?;
    let p = x.ncols();
    if p == 0 {
        return Err(Error::InvalidInput("no features".into()));
    }
    params.validate(p)?;

    let offset = y[0];
    let target: Vec<f64> = y.iter().map(|v| v - offset).collect();
    let order = presort(x);
    let settings = tree::TreeSettings {
        mtry: params.resolved_mtry(p),
        min_samples_leaf: params.min_samples_leaf,
        max_depth: params.max_depth,
        bootstrap: params.bootstrap,
    };
    let grown: Vec<(Tree, Vec<u32>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::child_rng(params.seed, t as u64);
            tree::grow(x, &target, &order, &settings, &mut rng)
        })
        .collect();
    let oob = want_oob.then(|| out_of_bag(x, offset, &grown));
    let trees: Vec<Tree> = grown.into_iter().map(|(t, _)| t).collect();

    let importance = importance_of(&trees, p);
    let forest = Forest {
        version: FOREST_FORMAT_VERSION,
        params: *params,
        n_features: p,
        offset,
        trees,
        importance,
    };
    Ok((forest, oob))
}

fn out_of_bag(x: &DMatrix<f64>, offset: f64, grown: &[(Tree, Vec<u32>)]) -> Vec<f64> {
    (0..x.nrows())
        .into_par_iter()
        .map(|r| {
            let (mut sum, mut k) = (0.0, 0usize);
            for (tree, counts) in grown {
                if counts[r] == 0 {
                    sum += tree.predict_row(x, r);
                    k += 1;
                }
            }
            if k > 0 {
                offset + sum / k as f64
            } else {
                // in-bag for every tree: fall back to the full ensemble
                let all: f64 = grown.iter().map(|(t, _)| t.predict_row(x, r)).sum();
                offset + all / grown.len() as f64
            }
        })
        .collect()
}

fn importance_of(trees: &[Tree], p: usize) -> Vec<f64> {
    let mut acc = vec![0.0; p];
    for t in trees {
        for node in &t.nodes {
            if let Node::Split { feature, gain, .. } = node {
                acc[*feature] += gain;
            }
        }
    }
    let total: f64 = acc.iter().sum();
    if total > 0.0 {
        acc.iter_mut().for_each(|v| *v /= total);
    }
    acc
}

impl Forest {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(self.offset + self.tree_mean(|t| t.predict(x)))
    }

    fn tree_mean(&self, f: impl Fn(&Tree) -> f64) -> f64 {
        self.trees.iter().map(f).sum::<f64>() / self.trees.len() as f64
    }

    /// Predictions for every row of `x`.
    pub fn predict_matrix(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok((0..x.nrows())
            .into_par_iter()
            .map(|r| self.offset + self.tree_mean(|t| t.predict_row(x, r)))
            .collect())
    }

    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let forest: Forest = serde_json::from_str(text)?;
        if forest.version != FOREST_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported forest format version {}",
                forest.version
            )));
        }
        Ok(forest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn data(n: usize, p: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
        let mut r = rng::rng(seed);
        let x = DMatrix::from_fn(n, p, |_, _| r.random::<f64>());
        let y = (0..n)
            .map(|i| 3.0 * x[(i, 0)] + r.random::<f64>() * 0.1)
            .collect();
        (x, y)
    }

    fn small(seed: u64) -> ForestParams {
        ForestParams {
            n_trees: 20,
            seed,
            ..ForestParams::default()
        }
    }

    #[test]
    fn constant_response_predicts_exactly() {
        let (x, _) = data(50, 3, 1);
        let y = vec![4.2; 50];
        let f = fit_forest(&x, &y, &small(1)).unwrap();
        for i in 0..50 {
            assert_eq!(f.predict(&f_row(&x, i)).unwrap(), 4.2);
        }
        assert!(f.importance.iter().all(|&v| v == 0.0));
    }

    fn f_row(x: &DMatrix<f64>, i: usize) -> Vec<f64> {
        x.row(i).iter().copied().collect()
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = data(80, 4, 2);
        let a = fit_forest(&x, &y, &small(9)).unwrap();
        let b = fit_forest(&x, &y, &small(9)).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = fit_forest(&x, &y, &small(10)).unwrap();
        assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let (x, y) = data(60, 3, 3);
        let f = fit_forest(&x, &y, &small(3)).unwrap();
        let back = Forest::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json().unwrap(), f.to_json().unwrap());
    }

    #[test]
    fn averaging_and_single_leaf() {
        let leaf = |v| Tree {
            nodes: vec![Node::Leaf {
                value: v,
                n_samples: 1,
            }],
        };
        let mut f = Forest {
            version: FOREST_FORMAT_VERSION,
            params: ForestParams::default(),
            n_features: 1,
            offset: 0.0,
            trees: vec![leaf(4.2)],
            importance: vec![0.0],
        };
        assert_eq!(f.predict(&[0.0]).unwrap(), 4.2);
        f.trees = vec![leaf(1.0), leaf(3.0)];
        assert_eq!(f.predict(&[0.0]).unwrap(), 2.0);
        assert!(matches!(
            f.predict(&[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn oob_predictions_are_honest() {
        // pure noise: in-sample fit looks good, out-of-bag does not
        let mut r = rng::rng(8);
        let x = DMatrix::from_fn(200, 3, |_, _| r.random::<f64>());
        let y: Vec<f64> = (0..200).map(|_| r.random::<f64>()).collect();
        let p = ForestParams {
            n_trees: 50,
            min_samples_leaf: 1,
            ..small(8)
        };
        let (f, oob) = fit_forest_oob(&x, &y, &p).unwrap();
        assert_eq!(f, fit_forest(&x, &y, &p).unwrap());
        let ins = f.predict_matrix(&x).unwrap();
        let mse = |pred: &[f64]| {
            pred.iter()
                .zip(&y)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / 200.0
        };
        assert!(mse(&oob) > 2.0 * mse(&ins));
        let no_boot = ForestParams {
            bootstrap: false,
            ..p
        };
        let (f, oob) = fit_forest_oob(&x, &y, &no_boot).unwrap();
        assert_eq!(oob, f.predict_matrix(&x).unwrap());
    }

    #[test]
    fn out_of_range_inputs_still_route() {
        let (x, y) = data(60, 2, 4);
        let f = fit_forest(&x, &y, &small(4)).unwrap();
        assert!(f.predict(&[1e9, -1e9]).unwrap().is_finite());
    }

    #[test]
    fn rejects_bad_input() {
        let (x, mut y) = data(10, 2, 5);
        assert!(fit_forest(&x.rows(0, 1).into_owned(), &y[..1], &small(1)).is_err());
        y[3] = f64::NAN;
        assert!(fit_forest(&x, &y, &small(1)).is_err());
        let (x, y) = data(10, 2, 5);
        let bad = ForestParams {
            mtry: Some(3),
            ..small(1)
        };
        assert!(fit_forest(&x, &y, &bad).is_err());
    }

    #[test]
    fn only_informative_feature_is_used() {
        // y depends on feature 1 only, and the other features are constant
        let n = 40;
        let x = DMatrix::from_fn(n, 4, |i, j| if j == 1 { i as f64 } else { 1.0 });
        let y: Vec<f64> = (0..n).map(|i| if i < 20 { 0.0 } else { 5.0 }).collect();
        let f = fit_forest(
            &x,
            &y,
            &ForestParams {
                mtry: Some(4),
                ..small(1)
            },
        )
        .unwrap();
        assert_eq!(f.importance, vec![0.0, 1.0, 0.0, 0.0]);
    }
}
