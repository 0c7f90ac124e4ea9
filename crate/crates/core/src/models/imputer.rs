use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::stats::median;

/// Per-column medians learned from training rows; fills `NaN` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub medians: Vec<f64>,
}

impl Imputer {
    /// Columns without any finite value impute to 0.
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let medians = x
            .column_iter()
            .map(|col| {
                let finite: Vec<f64> = col.iter().copied().filter(|v| v.is_finite()).collect();
                if finite.is_empty() {
                    0.0
                } else {
                    median(&finite)
                }
            })
            .collect();
        Self { medians }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.medians.len() {
            return Err(Error::DimensionMismatch {
                expected: self.medians.len(),
                got: x.ncols(),
            });
        }
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            for v in col.iter_mut() {
                if !v.is_finite() {
                    *v = self.medians[j];
                }
            }
        }
        Ok(out)
    }
}
