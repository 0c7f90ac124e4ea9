use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureInfo;
use crate::ingest::Modality;

pub const DEFAULT_TOP_K: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityShare {
    pub modality: String,
    pub count: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityImportance {
    pub top_k: usize,
    /// One entry per modality, in `ECG, ACCEL, TEMP, RESP` order.
    pub shares: Vec<ModalityShare>,
}

impl ModalityImportance {
    /// Modality with the largest score sum (first in order on ties).
    pub fn leader(&self) -> &str {
        let mut best = &self.shares[0];
        for s in &self.shares[1..] {
            if s.score > best.score {
                best = s;
            }
        }
        &best.modality
    }
}

/// Indices of the `top_k` largest values, ties broken by lower index.
pub fn top_indices(importance: &[f64], top_k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..importance.len()).collect();
    idx.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    idx.truncate(top_k);
    idx
}

pub fn modality_importance(
    importance: &[f64],
    meta: &[FeatureInfo],
    top_k: usize,
) -> Result<ModalityImportance> {
    if meta.len() != importance.len() {
        return Err(Error::DimensionMismatch {
            expected: meta.len(),
            got: importance.len(),
        });
    }
    if top_k > importance.len() {
        return Err(Error::InvalidInput(format!(
            "top_k {top_k} exceeds {} features",
            importance.len()
        )));
    }
    let mut shares: Vec<ModalityShare> = Modality::ALL
        .iter()
        .map(|m| ModalityShare {
            modality: m.feature_tag().to_string(),
            count: 0,
            score: 0.0,
        })
        .collect();
    for i in top_indices(importance, top_k) {
        let share = shares
            .iter_mut()
            .find(|s| s.modality == meta[i].modality)
            .ok_or_else(|| Error::UnknownModality(meta[i].modality.clone()))?;
        share.count += 1;
        share.score += importance[i];
    }
    Ok(ModalityImportance { top_k, shares })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{feature_meta, N_FEATURES};

    #[test]
    fn concentrated_on_ecg() {
        let mut imp = vec![0.0; N_FEATURES];
        for v in &mut imp[100..115] {
            *v = 1.0 / 15.0;
        }
        let m = modality_importance(&imp, feature_meta(), 15).unwrap();
        assert_eq!(m.shares[0].count, 15);
        assert_eq!(m.leader(), "ECG");
    }

    #[test]
    fn uniform_importance_takes_lowest_indices() {
        let imp = vec![1.0 / N_FEATURES as f64; N_FEATURES];
        let m = modality_importance(&imp, feature_meta(), 15).unwrap();
        assert_eq!(m.shares.iter().map(|s| s.count).sum::<usize>(), 15);
        assert_eq!(m.shares[0].count, 15);
        assert_eq!(top_indices(&imp, 3), vec![0, 1, 2]);
    }

    #[test]
    fn top_k_beyond_p() {
        assert!(modality_importance(&[1.0], &feature_meta()[..1], 2).is_err());
    }
}
