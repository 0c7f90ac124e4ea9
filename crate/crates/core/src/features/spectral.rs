//! Tachogram resampling and Welch power spectral density.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub const RESAMPLE_HZ: f64 = 4.0;
pub const WELCH_SEGMENT: usize = 256;

/// Linear interpolation of RR values onto a uniform grid.
///
/// Each interval is placed at the time its beat ends (cumulative sum of the
/// intervals, in seconds). The grid starts at the first beat and steps by
/// `1 / fs` up to the last beat.
pub fn resample_tachogram(rr_ms: &[f64], fs: f64) -> Vec<f64> {
    if rr_ms.len() < 2 {
        return Vec::new();
    }
    let mut times = Vec::with_capacity(rr_ms.len());
    let mut acc = 0.0;
    for &rr in rr_ms {
        acc += rr / 1000.0;
        times.push(acc);
    }
    let t0 = times[0];
    let t_end = times[times.len() - 1];
    let n = ((t_end - t0) * fs).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let t = t0 + k as f64 / fs;
        while j + 2 < times.len() && times[j + 1] < t {
            j += 1;
        }
        let (ta, tb) = (times[j], times[j + 1]);
        let w = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        out.push(rr_ms[j] + w * (rr_ms[j + 1] - rr_ms[j]));
    }
    out
}

thread_local! {
    static FFT: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(WELCH_SEGMENT);
}

/// One-sided PSD estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub density: Vec<f64>,
}

impl Psd {
    pub fn resolution(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }

    /// Rectangle-rule integral over bins with `lo <= f < hi`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        let df = self.resolution();
        self.freqs
            .iter()
            .zip(&self.density)
            .filter(|(&f, _)| f >= lo && f < hi)
            .map(|(_, &p)| p * df)
            .sum()
    }

    /// Frequency of the largest bin in `[lo, hi)`; the first one on ties.
    pub fn peak(&self, lo: f64, hi: f64) -> f64 {
        let mut best: Option<(f64, f64)> = None;
        for (&f, &p) in self.freqs.iter().zip(&self.density) {
            if f >= lo && f < hi && best.is_none_or(|(_, bp)| p > bp) {
                best = Some((f, p));
            }
        }
        best.map_or(f64::NAN, |(f, _)| f)
    }
}

/// Welch PSD with 256-sample periodic Hann segments and 50% overlap.
///
/// Each segment has its mean removed. Density scaling matches
/// `scipy.signal.welch(..., scaling="density")`. Returns `None` when the
/// signal is shorter than one segment.
pub fn welch(signal: &[f64], fs: f64) -> Option<Psd> {
    let n = WELCH_SEGMENT;
    if signal.len() < n {
        return None;
    }
    let hop = n / 2;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let segments = (signal.len() - n) / hop + 1;
    let mut acc = vec![0.0; n / 2 + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    FFT.with(|fft| {
        for s in 0..segments {
            let seg = &signal[s * hop..s * hop + n];
            let m = seg.iter().sum::<f64>() / n as f64;
            for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&window) {
                *b = Complex::new((x - m) * w, 0.0);
            }
            fft.process(&mut buf);
            for (a, c) in acc.iter_mut().zip(&buf) {
                *a += c.norm_sqr();
            }
        }
    });
    let scale = 1.0 / (fs * win_power * segments as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    let freqs = (0..=n / 2).map(|k| k as f64 * fs / n as f64).collect();
    Some(Psd { freqs, density })
}
