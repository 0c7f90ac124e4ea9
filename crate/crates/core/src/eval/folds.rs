use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Unit of the cross-validation split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Individual data points (segments).
    #[default]
    Record,
    /// Whole subjects; no subject appears in both train and test.
    Subject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// Fold of each point.
    pub folds: Vec<usize>,
}

impl FoldAssignment {
    /// `(train, test)` row indices of fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.folds.len()).partition(|&i| self.folds[i] != f)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        self.folds.iter().for_each(|&f| s[f] += 1);
        s
    }
}

/// Seeded shuffle, then round-robin assignment.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "k = {k}, need at least 2 folds"
        )));
    }
    if n < k {
        return Err(Error::InvalidInput(format!(
            "{n} points cannot fill {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::rng(seed));
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k;
    }
    Ok(FoldAssignment { k, seed, folds })
}

/// Folds over distinct subjects (in sorted order), expanded to their points.
pub fn kfold_by_subject(subject_ids: &[String], k: usize, seed: u64) -> Result<FoldAssignment> {
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for s in subject_ids {
        let next = index.len();
        index.entry(s.as_str()).or_insert(next);
    }
    // renumber in sorted order so the assignment ignores row order
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    let by_subject = kfold(index.len(), k, seed)?;
    Ok(FoldAssignment {
        k,
        seed,
        folds: subject_ids
            .iter()
            .map(|s| by_subject.folds[index[s.as_str()]])
            .collect(),
    })
}
