//! Descriptive statistics shared by the window and segment level extractors.
//!
//! Conventions: percentiles interpolate linearly at rank `(n - 1) * p / 100`
//! of the sorted series; the standard deviation divides by `n - 1` (0 for a
//! single value); skewness and excess kurtosis use population moments and are
//! 0 for zero-variance input. Invalid results are `NaN`.

pub const STAT10_NAMES: [&str; 10] = [
    "mean", "std", "min", "max", "skewness", "kurtosis", "p25", "p50", "p75", "max_drop",
];

pub const STAT13_NAMES: [&str; 13] = [
    "p10", "p25", "p50", "p75", "p90", "mean", "min", "max", "std", "skewness", "kurtosis", "iqr",
    "energy",
];

pub const DEFAULT_MIN_VALID_WINDOWS: usize = 12;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        1 => 0.0,
        n => {
            let m = mean(xs);
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        }
    }
}

/// Percentile of an already sorted slice.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = (n - 1) as f64 * p / 100.0;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn percentile(xs: &[f64], p: f64) -> f64 {
    percentile_sorted(&sorted(xs), p)
}

pub fn median(xs: &[f64]) -> f64 {
    percentile(xs, 50.0)
}

/// Skewness g1 and excess kurtosis g2 from population moments.
pub fn shape_moments(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let (lo, hi) = min_max(xs);
    if lo == hi {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return (0.0, 0.0);
    }
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Largest drop from a running peak to a later value; 0 for non-decreasing input.
pub fn max_drawdown(xs: &[f64]) -> f64 {
    let Some(&first) = xs.first() else {
        return f64::NAN;
    };
    let mut peak = first;
    let mut worst = 0.0f64;
    for &x in xs {
        peak = peak.max(x);
        worst = worst.max(peak - x);
    }
    worst
}

fn sample_std_with_mean(xs: &[f64], m: f64, constant: bool) -> f64 {
    if xs.len() < 2 || constant {
        return 0.0;
    }
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// mean, std, min, max, skewness, kurtosis, p25, p50, p75, maximum drop.
pub fn stat10(xs: &[f64]) -> [f64; 10] {
    if xs.is_empty() {
        return [f64::NAN; 10];
    }
    let s = sorted(xs);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let m = mean(xs);
    let (skew, kurt) = shape_moments(xs);
    [
        m,
        sample_std_with_mean(xs, m, lo == hi),
        lo,
        hi,
        skew,
        kurt,
        percentile_sorted(&s, 25.0),
        percentile_sorted(&s, 50.0),
        percentile_sorted(&s, 75.0),
        max_drawdown(xs),
    ]
}

/// p10, p25, p50, p75, p90, mean, min, max, std, skewness, kurtosis, IQR, energy.
///
/// Series shorter than `min_len` (or empty) are all-invalid.
pub fn stat13(xs: &[f64], min_len: usize) -> [f64; 13] {
    if xs.is_empty() || xs.len() < min_len {
        return [f64::NAN; 13];
    }
    let s = sorted(xs);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let m = mean(xs);
    let (skew, kurt) = shape_moments(xs);
    let p25 = percentile_sorted(&s, 25.0);
    let p75 = percentile_sorted(&s, 75.0);
    [
        percentile_sorted(&s, 10.0),
        p25,
        percentile_sorted(&s, 50.0),
        p75,
        percentile_sorted(&s, 90.0),
        m,
        lo,
        hi,
        sample_std_with_mean(xs, m, lo == hi),
        skew,
        kurt,
        p75 - p25,
        xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use fatigue_oracles::stats as oracle;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn percentiles_of_one_to_four() {
        let s = stat10(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s[0], 2.5);
        assert_eq!(s[6], 1.75);
        assert_eq!(s[7], 2.5);
        assert_eq!(s[8], 3.25);
        assert_eq!(s[4], 0.0);
    }

    #[test]
    fn stat13_one_to_four() {
        let s = stat13(&[1.0, 2.0, 3.0, 4.0], 1);
        assert_eq!(s[11], 1.5);
        assert_eq!(s[12], 7.5);
    }

    #[test]
    fn stat13_percentiles_of_one_to_hundred() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = stat13(&xs, 12);
        assert!(close(s[0], 10.9), "{}", s[0]);
        assert!(close(s[4], 90.1), "{}", s[4]);
    }

    #[test]
    fn constant_series_conventions() {
        let c = 0.3;
        let s = stat13(&[c; 20], 12);
        assert_eq!(s[8], 0.0);
        assert_eq!(s[11], 0.0);
        assert_eq!(s[9], 0.0);
        assert_eq!(s[10], 0.0);
        assert!(close(s[12], c * c));
    }

    #[test]
    fn short_series_is_invalid() {
        assert!(stat13(&[1.0; 11], 12).iter().all(|v| v.is_nan()));
        assert!(stat10(&[]).iter().all(|v| v.is_nan()));
    }

    #[test]
    fn drawdown_cases() {
        assert_eq!(max_drawdown(&[3.0, 5.0, 4.0, 6.0, 2.0]), 4.0);
        assert_eq!(oracle::max_drawdown(&[3.0, 5.0, 4.0, 6.0, 2.0]), 4.0);
        assert_eq!(stat10(&[3.0, 5.0, 4.0, 6.0, 2.0])[9], 4.0);
        assert_eq!(max_drawdown(&[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(max_drawdown(&[7.0; 5]), 0.0);
    }

    fn series() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3..1e3f64, 1..80)
    }

    proptest! {
        #[test]
        fn percentiles_are_monotone(xs in series()) {
            let s = stat13(&xs, 1);
            prop_assert!(s[6] <= s[0] && s[0] <= s[1] && s[1] <= s[2]);
            prop_assert!(s[2] <= s[3] && s[3] <= s[4] && s[4] <= s[7]);
        }

        #[test]
        fn permutation_invariant_except_drawdown(xs in series(), seed in any::<u64>()) {
            let mut ys = xs.clone();
            // Fisher-Yates driven by a tiny LCG keeps this independent of rand.
            let mut state = seed | 1;
            for i in (1..ys.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ys.swap(i, (state >> 33) as usize % (i + 1));
            }
            let (a, b) = (stat13(&xs, 1), stat13(&ys, 1));
            for k in 0..13 {
                prop_assert!(close(a[k], b[k]) || (a[k] - b[k]).abs() < 1e-9, "stat {k}: {} vs {}", a[k], b[k]);
            }
            let (a, b) = (stat10(&xs), stat10(&ys));
            for k in 0..9 {
                prop_assert!(close(a[k], b[k]) || (a[k] - b[k]).abs() < 1e-9, "stat {k}");
            }
        }

        #[test]
        fn scaling_law(xs in prop::collection::vec(-1e3..1e3f64, 3..60), s in 0.1..50.0f64) {
            let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            prop_assume!(hi - lo > 1e-3);
            let ys: Vec<f64> = xs.iter().map(|x| x * s).collect();
            let (a, b) = (stat13(&xs, 1), stat13(&ys, 1));
            let tol = |v: f64| 1e-9 * v.abs().max(1e3 * s);
            for k in [0, 1, 2, 3, 4, 5, 6, 7, 8, 11] {
                prop_assert!((a[k] * s - b[k]).abs() <= tol(b[k]), "stat {k}");
            }
            prop_assert!((a[12] * s * s - b[12]).abs() <= 1e-9 * b[12].abs().max(1.0));
            prop_assert!((a[9] - b[9]).abs() <= 1e-7 * a[9].abs().max(1.0));
            prop_assert!((a[10] - b[10]).abs() <= 1e-7 * a[10].abs().max(1.0));
            prop_assert!((max_drawdown(&xs) * s - max_drawdown(&ys)).abs() <= tol(max_drawdown(&ys)));
        }
    }
}
