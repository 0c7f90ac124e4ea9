//! Thirty heart-rate-variability features of one window of RR intervals.
//!
//! Time domain (14), frequency domain (8) on the 4 Hz resampled tachogram,
//! nonlinear (8). A feature that cannot be computed for the given input is
//! `NaN`; the others are still reported.

use super::spectral::{resample_tachogram, welch, RESAMPLE_HZ};
use super::stats::{mean, percentile_sorted, sorted, std_dev};

pub const HRV_NAMES: [&str; 30] = [
    "MeanNN",
    "SDNN",
    "RMSSD",
    "SDSD",
    "pNN50",
    "pNN20",
    "CVNN",
    "CVSD",
    "MedianNN",
    "MadNN",
    "IQRNN",
    "MeanHR",
    "MinHR",
    "MaxHR",
    "VLF",
    "LF",
    "HF",
    "TotalPower",
    "LFnorm",
    "HFnorm",
    "LF_HF",
    "HFPeak",
    "SD1",
    "SD2",
    "SD1_SD2",
    "EllipseArea",
    "SampEn",
    "ApEn",
    "DFA_alpha1",
    "TriangularIndex",
];

pub const VLF_BAND: (f64, f64) = (0.003, 0.04);
pub const LF_BAND: (f64, f64) = (0.04, 0.15);
pub const HF_BAND: (f64, f64) = (0.15, 0.4);
pub const TRIANGULAR_BIN_MS: f64 = 7.8125;

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        f64::NAN
    } else {
        a / b
    }
}

pub fn rmssd(rr: &[f64]) -> f64 {
    if rr.len() < 2 {
        return f64::NAN;
    }
    let sum: f64 = rr.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    (sum / (rr.len() - 1) as f64).sqrt()
}

/// Share of successive differences strictly larger than `threshold_ms`.
pub fn pnn(rr: &[f64], threshold_ms: f64) -> f64 {
    if rr.len() < 2 {
        return f64::NAN;
    }
    let count = rr
        .windows(2)
        .filter(|w| (w[1] - w[0]).abs() > threshold_ms)
        .count();
    count as f64 / (rr.len() - 1) as f64
}

pub fn hrv30(rr: &[f64]) -> [f64; 30] {
    let mut out = [f64::NAN; 30];
    if rr.len() < 2 {
        return out;
    }
    let diffs: Vec<f64> = rr.windows(2).map(|w| w[1] - w[0]).collect();
    let s = sorted(rr);
    let mean_nn = mean(rr);
    let sdnn = if s[0] == s[s.len() - 1] {
        0.0
    } else {
        std_dev(rr)
    };
    let rmssd = rmssd(rr);
    let sdsd = std_dev(&diffs);
    let median = percentile_sorted(&s, 50.0);
    let abs_dev: Vec<f64> = rr.iter().map(|x| (x - median).abs()).collect();

    out[0] = mean_nn;
    out[1] = sdnn;
    out[2] = rmssd;
    out[3] = sdsd;
    out[4] = pnn(rr, 50.0);
    out[5] = pnn(rr, 20.0);
    out[6] = ratio(sdnn, mean_nn);
    out[7] = ratio(rmssd, mean_nn);
    out[8] = median;
    out[9] = percentile_sorted(&sorted(&abs_dev), 50.0);
    out[10] = percentile_sorted(&s, 75.0) - percentile_sorted(&s, 25.0);
    out[11] = rr.iter().map(|x| 60_000.0 / x).sum::<f64>() / rr.len() as f64;
    out[12] = 60_000.0 / s[s.len() - 1];
    out[13] = 60_000.0 / s[0];

    frequency_domain(rr, &mut out[14..22]);

    let sd1 = sdsd / std::f64::consts::SQRT_2;
    let sd2 = (2.0 * sdnn * sdnn - 0.5 * sdsd * sdsd).max(0.0).sqrt();
    out[22] = sd1;
    out[23] = sd2;
    out[24] = ratio(sd1, sd2);
    out[25] = std::f64::consts::PI * sd1 * sd2;
    let r = 0.2 * sdnn;
    (out[26], out[27]) = entropies(rr, 2, r);
    out[28] = dfa_alpha(rr, 4, 16);
    out[29] = triangular_index(rr, TRIANGULAR_BIN_MS);
    out
}

fn frequency_domain(rr: &[f64], out: &mut [f64]) {
    let tach = resample_tachogram(rr, RESAMPLE_HZ);
    let Some(psd) = welch(&tach, RESAMPLE_HZ) else {
        return;
    };
    let vlf = psd.band_power(VLF_BAND.0, VLF_BAND.1);
    let lf = psd.band_power(LF_BAND.0, LF_BAND.1);
    let hf = psd.band_power(HF_BAND.0, HF_BAND.1);
    out[0] = vlf;
    out[1] = lf;
    out[2] = hf;
    out[3] = vlf + lf + hf;
    out[4] = ratio(lf, lf + hf);
    out[5] = ratio(hf, lf + hf);
    out[6] = ratio(lf, hf);
    out[7] = if hf > 0.0 {
        psd.peak(HF_BAND.0, HF_BAND.1)
    } else {
        f64::NAN
    };
}

/// Richman-Moorman sample entropy with Chebyshev distance.
///
/// Uses the first `n - m` templates for both lengths; `NaN` when no template
/// pair matches.
pub fn sample_entropy(x: &[f64], m: usize, r: f64) -> f64 {
    entropies(x, m, r).0
}

/// Pincus approximate entropy (self-matches included).
pub fn approximate_entropy(x: &[f64], m: usize, r: f64) -> f64 {
    entropies(x, m, r).1
}

/// Sample and approximate entropy from one pass over template pairs.
///
/// A pair matching at length `m + 1` is the same event for both measures, so
/// the per-template counts for approximate entropy and the pair totals for
/// sample entropy come out of the same loop.
pub fn entropies(x: &[f64], m: usize, r: f64) -> (f64, f64) {
    let n = x.len();
    if n < m + 2 {
        return (f64::NAN, f64::NAN);
    }
    let short = n - m + 1; // templates of length m
    let long = n - m; // templates of length m + 1
                      // self-matches
    let mut c_short = vec![1u32; short];
    let mut c_long = vec![1u32; long];
    let (mut b, mut a) = (0u64, 0u64);
    for i in 0..short {
        for j in i + 1..short {
            if !(0..m).all(|k| (x[i + k] - x[j + k]).abs() <= r) {
                continue;
            }
            c_short[i] += 1;
            c_short[j] += 1;
            if j < long {
                b += 1;
                if (x[i + m] - x[j + m]).abs() <= r {
                    a += 1;
                    c_long[i] += 1;
                    c_long[j] += 1;
                }
            }
        }
    }
    let phi = |counts: &[u32]| {
        let len = counts.len() as f64;
        counts.iter().map(|&c| (c as f64 / len).ln()).sum::<f64>() / len
    };
    let apen = phi(&c_short) - phi(&c_long);
    let sampen = if a == 0 || b == 0 {
        f64::NAN
    } else {
        -(a as f64 / b as f64).ln()
    };
    (sampen, apen)
}

/// Short-term detrended fluctuation exponent over box sizes `min..=max`.
pub fn dfa_alpha(x: &[f64], min_box: usize, max_box: usize) -> f64 {
    let n = x.len();
    if n < max_box {
        return f64::NAN;
    }
    let m = mean(x);
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &v in x {
        acc += v - m;
        profile.push(acc);
    }
    let mut log_n = Vec::new();
    let mut log_f = Vec::new();
    for size in min_box..=max_box {
        let boxes = n / size;
        let mut sse = 0.0;
        for b in 0..boxes {
            sse += linear_fit_sse(&profile[b * size..(b + 1) * size]);
        }
        let f = (sse / (boxes * size) as f64).sqrt();
        if !(f > 0.0) {
            return f64::NAN;
        }
        log_n.push((size as f64).ln());
        log_f.push(f.ln());
    }
    slope(&log_n, &log_f)
}

/// Residual sum of squares of the least-squares line through (k, y_k).
fn linear_fit_sse(y: &[f64]) -> f64 {
    let xs: Vec<f64> = (0..y.len()).map(|k| k as f64).collect();
    let b = slope(&xs, y);
    let (mx, my) = (mean(&xs), mean(y));
    y.iter()
        .zip(&xs)
        .map(|(&yk, &xk)| (yk - my - b * (xk - mx)).powi(2))
        .sum()
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Interval count divided by the height of the tallest histogram bin.
pub fn triangular_index(rr: &[f64], bin_ms: f64) -> f64 {
    if rr.is_empty() {
        return f64::NAN;
    }
    let mut bins: Vec<i64> = rr.iter().map(|x| (x / bin_ms).floor() as i64).collect();
    bins.sort_unstable();
    let mut tallest = 0;
    let mut run = 0;
    for i in 0..bins.len() {
        run = if i > 0 && bins[i] == bins[i - 1] {
            run + 1
        } else {
            1
        };
        tallest = tallest.max(run);
    }
    rr.len() as f64 / tallest as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(name: &str) -> usize {
        HRV_NAMES.iter().position(|n| *n == name).unwrap()
    }

    #[test]
    fn constant_series() {
        let f = hrv30(&[800.0; 300]);
        assert_eq!(f[idx("RMSSD")], 0.0);
        assert_eq!(f[idx("SDNN")], 0.0);
        assert_eq!(f[idx("MeanHR")], 75.0);
        assert_eq!(f[idx("TriangularIndex")], 1.0);
        // no spectral power at all
        assert_eq!(f[idx("LF")], 0.0);
        assert!(f[idx("LF_HF")].is_nan());
    }

    #[test]
    fn rmssd_hand_value() {
        let v = hrv30(&[800.0, 810.0, 790.0, 800.0])[idx("RMSSD")];
        assert!((v - 14.142135623730951).abs() < 1e-9);
        assert!((v - (600.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pnn50_counts_strictly_greater() {
        assert_eq!(hrv30(&[800.0, 860.0, 870.0])[idx("pNN50")], 0.5);
        assert_eq!(pnn(&[800.0, 850.0], 50.0), 0.0);
    }

    #[test]
    fn sample_entropy_of_periodic_series_is_zero() {
        let x: Vec<f64> = (0..60).map(|i| [1.0, 2.0, 3.0][i % 3]).collect();
        assert_eq!(sample_entropy(&x, 2, 0.1), 0.0);
        assert!(approximate_entropy(&x, 2, 0.1).abs() < 0.05);
    }

    #[test]
    fn dfa_of_white_noise_is_near_half() {
        // deterministic pseudo-random white noise
        let mut s = 12345u64;
        let x: Vec<f64> = (0..4000)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let a = dfa_alpha(&x, 4, 16);
        assert!((a - 0.5).abs() < 0.15, "{a}");
    }

    #[test]
    fn time_shift_does_not_matter() {
        let rr: Vec<f64> = (0..300)
            .map(|i| 800.0 + 40.0 * ((i as f64) * 0.3).sin())
            .collect();
        let a = hrv30(&rr);
        let b = hrv30(&rr.clone());
        for (x, y) in a.iter().zip(&b) {
            assert!(x == y || (x.is_nan() && y.is_nan()));
        }
    }

    #[test]
    fn respiratory_modulation_shows_in_hf() {
        // RR modulated at 0.25 Hz ~ respiratory sinus arrhythmia
        let mut rr = Vec::new();
        let mut t = 0.0;
        while t < 300.0 {
            let v = 850.0 + 40.0 * (2.0 * std::f64::consts::PI * 0.25 * t).sin();
            rr.push(v);
            t += v / 1000.0;
        }
        let f = hrv30(&rr);
        assert!(f[idx("HF")] > 5.0 * f[idx("LF")]);
        assert!((f[idx("HFPeak")] - 0.25).abs() < 0.02);
        assert!(f[idx("HFnorm")] > 0.8);
    }
}
