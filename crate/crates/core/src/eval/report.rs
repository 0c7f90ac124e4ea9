//! `report.json`, `table1.csv` and `fig1.csv`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cv::CvReport;
use super::importance::ModalityImportance;
use crate::error::{Error, Result};

/// One row of the published results on the original private cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub model: &'static str,
    pub rmse: &'static str,
    pub mae: &'static str,
    pub mape: &'static str,
    pub corr: &'static str,
}

const REFERENCE: [ReferenceRow; 5] = [
    ReferenceRow {
        model: "Linear Regression",
        rmse: "2.66±0.39",
        mae: "2.08±0.27",
        mape: "0.59±0.11",
        corr: "0.41",
    },
    ReferenceRow {
        model: "Random Forest",
        rmse: "1.98±0.08",
        mae: "1.56±0.07",
        mape: "0.47±0.05",
        corr: "0.71",
    },
    ReferenceRow {
        model: "MERF Age",
        rmse: "1.82±0.10",
        mae: "1.38±0.08",
        mape: "0.38±0.04",
        corr: "0.74",
    },
    ReferenceRow {
        model: "MERF BMI",
        rmse: "1.88±0.11",
        mae: "1.47±0.07",
        mape: "0.42±0.06",
        corr: "0.73",
    },
    ReferenceRow {
        model: "MERF Age&BMI",
        rmse: "1.78±0.13",
        mae: "1.35±0.09",
        mape: "0.36±0.07",
        corr: "0.75",
    },
];

/// Published 5-fold results from a private 21-subject cohort. Carried in
/// reports for side-by-side reading only; they cannot be reproduced here.
pub fn reference_table() -> &'static [ReferenceRow] {
    &REFERENCE
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelImportance {
    pub model: String,
    pub modality: ModalityImportance,
}

#[derive(Debug, Clone, Serialize)]
struct Reference {
    note: &'static str,
    table: &'static [ReferenceRow],
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport<'a> {
    reference: Reference,
    pub models: &'a [CvReport],
    pub modality_importance: &'a [ModelImportance],
}

impl<'a> EvaluationReport<'a> {
    pub fn new(models: &'a [CvReport], modality_importance: &'a [ModelImportance]) -> Self {
        Self {
            reference: Reference {
                note: "published results on a private 21-subject cohort; documentation only, never compared against",
                table: reference_table(),
            },
            models,
            modality_importance,
        }
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_report_json(path: impl AsRef<Path>, report: &EvaluationReport<'_>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    write_file(path.as_ref(), |w| writeln!(w, "{text}"))
}

fn pm(mean: f64, std: f64) -> String {
    format!("{mean:.3}±{std:.3}")
}

/// Rows = models; columns `RMSE, MAE, MAPE, Corr` as `mean±std` (Corr pooled).
pub fn write_table1_csv(path: impl AsRef<Path>, reports: &[CvReport]) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "model,RMSE,MAE,MAPE,Corr")?;
        for r in reports {
            let mape = r.mape.map_or_else(|| "NA".into(), |m| pm(m.mean, m.std));
            let corr = r.corr.map_or_else(|| "NA".into(), |c| format!("{c:.3}"));
            writeln!(
                w,
                "{},{},{},{mape},{corr}",
                r.label,
                pm(r.rmse.mean, r.rmse.std),
                pm(r.mae.mean, r.mae.std)
            )?;
        }
        Ok(())
    })
}

pub fn write_fig1_csv(path: impl AsRef<Path>, rows: &[ModelImportance]) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "model,modality,top15_count,score_sum")?;
        for r in rows {
            for s in &r.modality.shares {
                writeln!(w, "{},{},{},{}", r.model, s.modality, s.count, s.score)?;
            }
        }
        Ok(())
    })
}
