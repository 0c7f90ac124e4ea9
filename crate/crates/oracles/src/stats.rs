/// k-th smallest value (0-based) found by counting, O(n^2).
pub fn order_statistic(xs: &[f64], k: usize) -> f64 {
    for &x in xs {
        let less = xs.iter().filter(|&&y| y < x).count();
        let equal = xs.iter().filter(|&&y| y == x).count();
        if less <= k && k < less + equal {
            return x;
        }
    }
    unreachable!("k out of range")
}

/// Linear-interpolation percentile at rank (n-1)p/100, via order statistics.
pub fn percentile(xs: &[f64], p: f64) -> f64 {
    let n = xs.len();
    let rank = (n as f64 - 1.0) * p / 100.0;
    let k = rank.floor() as usize;
    let lower = order_statistic(xs, k);
    if k + 1 >= n {
        return lower;
    }
    let upper = order_statistic(xs, k + 1);
    lower + (rank - k as f64) * (upper - lower)
}

/// Sum accumulated back to front.
fn rsum(it: impl DoubleEndedIterator<Item = f64>) -> f64 {
    it.rev().fold(0.0, |a, b| a + b)
}

pub fn mean(xs: &[f64]) -> f64 {
    rsum(xs.iter().copied()) / xs.len() as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let m = mean(xs);
    (rsum(xs.iter().map(|x| (x - m) * (x - m))) / (xs.len() - 1) as f64).sqrt()
}

fn central_moment(xs: &[f64], k: i32) -> f64 {
    let m = mean(xs);
    rsum(xs.iter().map(|x| (x - m).powi(k))) / xs.len() as f64
}

pub fn skewness(xs: &[f64]) -> f64 {
    if xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    central_moment(xs, 3) / central_moment(xs, 2).powi(3).sqrt()
}

pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    if xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    central_moment(xs, 4) / central_moment(xs, 2).powi(2) - 3.0
}

/// Max over all i <= j of xs[i] - xs[j].
pub fn max_drawdown(xs: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..xs.len() {
        for j in i..xs.len() {
            best = best.max(xs[i] - xs[j]);
        }
    }
    best
}

pub fn min(xs: &[f64]) -> f64 {
    order_statistic(xs, 0)
}

pub fn max(xs: &[f64]) -> f64 {
    order_statistic(xs, xs.len() - 1)
}

pub fn stat10(xs: &[f64]) -> [f64; 10] {
    [
        mean(xs),
        sample_std(xs),
        min(xs),
        max(xs),
        skewness(xs),
        excess_kurtosis(xs),
        percentile(xs, 25.0),
        percentile(xs, 50.0),
        percentile(xs, 75.0),
        max_drawdown(xs),
    ]
}

pub fn stat13(xs: &[f64], min_len: usize) -> [f64; 13] {
    if xs.len() < min_len || xs.is_empty() {
        return [f64::NAN; 13];
    }
    let p25 = percentile(xs, 25.0);
    let p75 = percentile(xs, 75.0);
    [
        percentile(xs, 10.0),
        p25,
        percentile(xs, 50.0),
        p75,
        percentile(xs, 90.0),
        mean(xs),
        min(xs),
        max(xs),
        sample_std(xs),
        skewness(xs),
        excess_kurtosis(xs),
        p75 - p25,
        rsum(xs.iter().map(|x| x * x)) / xs.len() as f64,
    ]
}

fn successive_diffs(rr: &[f64]) -> Vec<f64> {
    (1..rr.len()).map(|i| rr[i] - rr[i - 1]).collect()
}

pub fn rmssd(rr: &[f64]) -> f64 {
    let d = successive_diffs(rr);
    (rsum(d.iter().map(|x| x * x)) / d.len() as f64).sqrt()
}

pub fn sdnn(rr: &[f64]) -> f64 {
    sample_std(rr)
}

pub fn pnn(rr: &[f64], threshold_ms: f64) -> f64 {
    let d = successive_diffs(rr);
    d.iter().filter(|x| x.abs() > threshold_ms).count() as f64 / d.len() as f64
}

/// Relative closeness with an absolute floor for values that are ~0.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()) || (a - b).abs() <= 1e-12
}
