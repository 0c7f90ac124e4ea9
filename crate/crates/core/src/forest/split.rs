//! CART variance-reduction split search.

use nalgebra::DMatrix;

/// Gains at or below this fraction of the node's sum of squares are treated
/// as rounding noise.
pub(crate) const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// SSE(parent) - SSE(left) - SSE(right).
    pub gain: f64,
    pub n_left: usize,
}

/// Threshold strictly between two consecutive distinct values, `a < t < b`
/// whenever such a double exists (otherwise `a`).
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a / 2.0 + b / 2.0;
    if mid >= b || mid < a {
        a
    } else {
        mid
    }
}

/// Sum of squared deviations, two-pass.
pub(crate) fn sse(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, s) = values
        .clone()
        .fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        return 0.0;
    }
    let m = s / n as f64;
    values.map(|v| (v - m) * (v - m)).sum()
}

/// Scans one feature's samples in ascending order of the feature value and
/// returns the best admissible cut for it as `(threshold, gain, n_left)`.
///
/// `values` and `targets` are the node's feature values (sorted) and the
/// matching responses; `total` is the sum of `targets`.
pub(crate) fn sweep(
    values: &[f64],
    targets: &[f64],
    total: f64,
    min_leaf: usize,
) -> Option<(f64, f64, usize)> {
    let m = values.len();
    debug_assert_eq!(m, targets.len());
    if m < 2 * min_leaf {
        return None;
    }
    let mf = m as f64;
    let mut left_sum: f64 = targets[..min_leaf - 1].iter().sum();
    let (mut best_k, mut best_gain) = (usize::MAX, f64::NEG_INFINITY);
    // cut after position k: left = 0..=k
    for k in min_leaf - 1..m - min_leaf {
        left_sum += targets[k];
        if values[k] < values[k + 1] {
            let nl = (k + 1) as f64;
            let nr = mf - nl;
            // nl·nr/m · (mean_l − mean_r)²
            let d = left_sum * nr - (total - left_sum) * nl;
            let gain = d * d / (mf * nl * nr);
            if gain > best_gain {
                best_gain = gain;
                best_k = k;
            }
        }
    }
    (best_k != usize::MAX).then(|| (midpoint(values[best_k], values[best_k + 1]), best_gain, best_k + 1))
}

/// Best variance-reduction split of `rows` over `features`.
///
/// Candidate thresholds are midpoints of consecutive distinct values; a split
/// must leave at least `min_leaf` rows on each side and reduce the SSE.
/// Ties go to the lowest feature index, then the lowest threshold.
pub fn best_split(
    x: &DMatrix<f64>,
    y: &[f64],
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    let m = rows.len();
    if m < 2 * min_leaf.max(1) {
        return None;
    }
    if rows.iter().all(|&r| y[r] == y[rows[0]]) {
        return None;
    }
    let total: f64 = rows.iter().map(|&r| y[r]).sum();
    let node_sse = sse(rows.iter().map(|&r| y[r]));
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<Split> = None;
    let mut order = rows.to_vec();
    for &f in &features {
        let col = x.column(f);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        let values: Vec<f64> = order.iter().map(|&r| col[r]).collect();
        let targets: Vec<f64> = order.iter().map(|&r| y[r]).collect();
        if let Some((threshold, gain, n_left)) = sweep(&values, &targets, total, min_leaf.max(1)) {
            if gain > 0.0 && gain > GAIN_EPS * node_sse && best.is_none_or(|b| gain > b.gain) {
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                    n_left,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_function_split() {
        let x = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let y = [0.0, 0.0, 10.0, 10.0];
        let s = best_split(&x, &y, &[0, 1, 2, 3], &[0], 1).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 1.5);
        assert!((s.gain - 100.0).abs() < 1e-12);
        assert_eq!(s.n_left, 2);
    }

    #[test]
    fn constant_target_has_no_split() {
        let x = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        assert!(best_split(&x, &[2.5; 4], &[0, 1, 2, 3], &[0], 1).is_none());
    }

    #[test]
    fn constant_feature_has_no_split() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0; 4]);
        assert!(best_split(&x, &[0.0, 1.0, 2.0, 3.0], &[0, 1, 2, 3], &[0], 1).is_none());
    }

    #[test]
    fn min_leaf_is_respected() {
        let x = DMatrix::from_column_slice(6, 1, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = [0.0, 9.0, 9.0, 9.0, 9.0, 9.0];
        let s = best_split(&x, &y, &[0, 1, 2, 3, 4, 5], &[0], 2).unwrap();
        assert!(s.n_left >= 2 && 6 - s.n_left >= 2);
        assert!(best_split(&x, &y, &[0, 1, 2, 3, 4, 5], &[0], 4).is_none());
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // two identical columns
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let y = [0.0, 0.0, 10.0, 10.0];
        let s = best_split(&x, &y, &[0, 1, 2, 3], &[1, 0], 1).unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn midpoint_stays_between_neighbours() {
        let a = 1.0_f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), a);
        assert_eq!(midpoint(-1.0, 3.0), 1.0);
        let (lo, hi) = (f64::MAX * 0.75, f64::MAX);
        let m = midpoint(lo, hi);
        assert!(m.is_finite() && lo < m && m < hi);
    }
}
