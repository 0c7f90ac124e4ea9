use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub rmse: f64,
    pub mae: f64,
    /// `None` when every target is zero.
    pub mape: Option<f64>,
    /// Points left out of MAPE because their target is zero.
    pub mape_excluded: usize,
}

pub fn metrics(y: &[f64], yhat: &[f64]) -> Result<MetricSet> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("metrics of an empty sample".into()));
    }
    let n = y.len() as f64;
    let (mut se, mut ae, mut pe, mut used) = (0.0, 0.0, 0.0, 0usize);
    for (&a, &b) in y.iter().zip(yhat) {
        let d = a - b;
        se += d * d;
        ae += d.abs();
        if a != 0.0 {
            pe += (d / a).abs();
            used += 1;
        }
    }
    Ok(MetricSet {
        rmse: (se / n).sqrt(),
        mae: ae / n,
        mape: (used > 0).then(|| pe / used as f64),
        mape_excluded: y.len() - used,
    })
}

/// Sample Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: yhat.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::InvalidInput(
            "correlation needs at least two points".into(),
        ));
    }
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mh = yhat.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in y.iter().zip(yhat) {
        let (da, db) = (a - my, b - mh);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidInput(
            "correlation of a constant series".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Mean and sample standard deviation across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        Some(Self {
            mean: crate::features::stats::mean(xs),
            std: crate::features::stats::std_dev(xs),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_examples() {
        let m = metrics(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((m.rmse, m.mae, m.mape), (0.0, 0.0, Some(0.0)));

        let m = metrics(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!((m.rmse - 12.5_f64.sqrt()).abs() < 1e-12);
        assert_eq!((m.mape, m.mape_excluded), (None, 2));

        let m = metrics(&[2.0, 4.0], &[1.0, 6.0]).unwrap();
        assert!((m.mae - 1.5).abs() < 1e-12);
        assert!((m.mape.unwrap() - 0.5).abs() < 1e-12);

        assert!(metrics(&[], &[]).is_err());
    }

    #[test]
    fn correlation_examples() {
        let y = [1.0, 2.0, 3.0, 5.0];
        let affine: Vec<f64> = y.iter().map(|v| 2.0 * v + 3.0).collect();
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert!((pearson(&y, &affine).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&y, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
