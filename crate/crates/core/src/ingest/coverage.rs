use serde::{Deserialize, Serialize};

use super::{Modality, Segment, StreamSlice, MINUTE_MS};

/// Length of the feature windows each segment is cut into.
pub const WINDOW_MS: i64 = 5 * MINUTE_MS;

/// Expected samples per second for each modality.
///
/// RR is expressed as intervals per second (1.2 = 72 beats per minute).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NominalRates {
    pub rr_per_s: f64,
    pub accel_hz: f64,
    pub temp_hz: f64,
    pub resp_hz: f64,
}

impl Default for NominalRates {
    fn default() -> Self {
        Self {
            rr_per_s: 1.2,
            accel_hz: 30.0,
            temp_hz: 0.25,
            resp_hz: 0.25,
        }
    }
}

impl NominalRates {
    pub fn rate(&self, modality: Modality) -> f64 {
        match modality {
            Modality::Rr => self.rr_per_s,
            Modality::Accel => self.accel_hz,
            Modality::Temp => self.temp_hz,
            Modality::Resp => self.resp_hz,
        }
    }

    pub fn expected(&self, modality: Modality, duration_ms: i64) -> f64 {
        self.rate(modality) * duration_ms as f64 / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverageConfig {
    pub rates: NominalRates,
    /// Minimum observed/expected ratio for a modality to be valid in a window.
    pub min_window_coverage: f64,
    /// Minimum RR intervals for the RR modality to be valid in a window.
    pub min_rr_intervals: usize,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            rates: NominalRates::default(),
            min_window_coverage: 0.5,
            min_rr_intervals: 100,
        }
    }
}

impl CoverageConfig {
    /// Observed/expected sample ratio over `duration_ms`, clamped to [0, 1].
    pub fn fraction(&self, modality: Modality, observed: usize, duration_ms: i64) -> f64 {
        let expected = self.rates.expected(modality, duration_ms);
        if expected <= 0.0 {
            return 0.0;
        }
        (observed as f64 / expected).clamp(0.0, 1.0)
    }

    /// Whether `slice` (already clipped to one window) is usable for `modality`.
    pub fn window_valid(&self, modality: Modality, slice: &StreamSlice<'_>) -> bool {
        let n = slice.len();
        if modality == Modality::Rr && n < self.min_rr_intervals {
            return false;
        }
        n > 0 && self.fraction(modality, n, WINDOW_MS) >= self.min_window_coverage
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Indexed by [`Modality::index`].
    pub fractions: [f64; 4],
    /// Windows in which every modality is valid.
    pub valid_windows: usize,
}

impl CoverageReport {
    pub fn fraction(&self, modality: Modality) -> f64 {
        self.fractions[modality.index()]
    }
}

pub fn coverage(segment: &Segment<'_>, config: &CoverageConfig) -> CoverageReport {
    let duration = segment.end_ms - segment.start_ms;
    let fractions = Modality::ALL.map(|m| config.fraction(m, segment.stream(m).len(), duration));
    let mut valid_windows = 0;
    let mut start = segment.start_ms;
    while start + WINDOW_MS <= segment.end_ms {
        let end = start + WINDOW_MS;
        if Modality::ALL
            .iter()
            .all(|&m| config.window_valid(m, &segment.stream(m).clip(start, end)))
        {
            valid_windows += 1;
        }
        start = end;
    }
    CoverageReport {
        fractions,
        valid_windows,
    }
}
