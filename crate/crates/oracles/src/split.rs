/// Exhaustive best split: every feature, every midpoint between consecutive
/// distinct values, SSE computed from scratch on both sides.
///
/// Returns (feature, threshold, gain); ties keep the first (lowest feature,
/// then lowest threshold) candidate.
pub fn best_split(x: &[Vec<f64>], y: &[f64], min_leaf: usize) -> Option<(usize, f64, f64)> {
    let sse = |idx: &[usize]| -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        let m = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
        idx.iter().map(|&i| (y[i] - m).powi(2)).sum()
    };
    let all: Vec<usize> = (0..y.len()).collect();
    let parent = sse(&all);
    let p = x.first().map_or(0, Vec::len);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..p {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = w[0] / 2.0 + w[1] / 2.0;
            let left: Vec<usize> = all.iter().copied().filter(|&i| x[i][f] <= thr).collect();
            let right: Vec<usize> = all.iter().copied().filter(|&i| x[i][f] > thr).collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let gain = parent - sse(&left) - sse(&right);
            if gain > 1e-9 * parent.max(1e-300) && best.is_none_or(|b| gain > b.2 * (1.0 + 1e-12)) {
                best = Some((f, thr, gain));
            }
        }
    }
    best
}
