//! Ridge-regression baseline solved through the normal equations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::check_finite;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
}

/// Minimises `‖y − Xw − w₀‖² + λ‖w‖²` with the intercept left unpenalised.
pub fn fit_linear_baseline(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<LinearModel> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "ridge lambda {lambda} must be >= 0"
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("no training rows".into()));
    }
    check_finite(x, y)?;
    let (n, p) = x.shape();
    if lambda == 0.0 && n <= p {
        // centred design has rank at most n - 1
        return Err(Error::Singular);
    }
    let x_mean: DVector<f64> = x.row_mean().transpose();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= x_mean.transpose();
    }
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

    // Solve in the variables v = D w, D = diag(column norms), which leaves
    // the objective unchanged but keeps wildly different column scales from
    // wrecking the factorisation.
    let gram = xc.transpose() * &xc;
    let d: Vec<f64> = (0..p)
        .map(|j| {
            let g = gram[(j, j)].sqrt();
            if g > 0.0 {
                g
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = DMatrix::from_fn(p, p, |i, j| gram[(i, j)] / (d[i] * d[j]));
    for i in 0..p {
        scaled[(i, i)] += lambda / (d[i] * d[i]);
    }
    let rhs = DVector::from_iterator(
        p,
        (xc.transpose() * yc).iter().zip(&d).map(|(r, di)| r / di),
    );
    let chol = scaled.clone().cholesky().ok_or(Error::Singular)?;
    if lambda == 0.0 {
        let l = chol.l();
        let diag_max = (0..p).map(|i| scaled[(i, i)]).fold(0.0, f64::max);
        if (0..p).any(|i| l[(i, i)] * l[(i, i)] <= 1e-12 * diag_max) {
            return Err(Error::Singular);
        }
    }
    let v = chol.solve(&rhs);
    let w = DVector::from_iterator(p, v.iter().zip(&d).map(|(vi, di)| vi / di));
    let intercept = y_mean - w.dot(&x_mean);
    Ok(LinearModel {
        weights: w.iter().copied().collect(),
        intercept,
        lambda,
    })
}

/// Ridge on z-scored columns, reported in raw units: the penalty then acts
/// evenly on features whose scales differ by many orders of magnitude.
/// Constant columns get weight zero.
pub fn fit_standardized_ridge(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<LinearModel> {
    check_finite(x, y)?;
    let (n, p) = x.shape();
    if n == 0 {
        return Err(Error::InvalidInput("no training rows".into()));
    }
    let mut z = x.clone();
    let mut scale = vec![0.0; p];
    let mut mean = vec![0.0; p];
    for j in 0..p {
        let col = x.column(j);
        let m = col.mean();
        let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
        mean[j] = m;
        if sd > 0.0 && sd.is_finite() {
            scale[j] = sd;
            z.column_mut(j).iter_mut().for_each(|v| *v = (*v - m) / sd);
        } else {
            z.column_mut(j).fill(0.0);
        }
    }
    let fitted = fit_linear_baseline(&z, y, lambda)?;
    let weights: Vec<f64> = fitted
        .weights
        .iter()
        .zip(&scale)
        .map(|(w, s)| if *s > 0.0 { w / s } else { 0.0 })
        .collect();
    let intercept = fitted.intercept - weights.iter().zip(&mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel {
        weights,
        intercept,
        lambda,
    })
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(self.intercept + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn predict_matrix(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        (0..x.nrows())
            .map(|i| self.predict(&x.row(i).iter().copied().collect::<Vec<_>>()))
            .collect()
    }
}
