//! Window- and segment-level feature extraction.
//!
//! A segment is cut into 72 five-minute windows. Every window yields 58 base
//! features: 30 HRV, 8 actigraphy, and 10 descriptive statistics each for skin
//! temperature and respiration rate. Each base feature is then summarised
//! over the windows where it is valid with 13 statistics, giving a
//! 754-dimensional vector laid out as `base * 13 + statistic`.

pub mod actigraphy;
pub mod hrv;
mod io;
pub mod spectral;
pub mod stats;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::ingest::{CoverageConfig, Modality, Segment, StreamSlice, WINDOW_MS};
pub use io::{read_feature_meta, write_feature_meta, write_features_csv, FEATURE_META_VERSION};
use stats::{stat10, stat13, DEFAULT_MIN_VALID_WINDOWS, STAT10_NAMES, STAT13_NAMES};

pub const N_HRV: usize = 30;
pub const N_ACTI: usize = 8;
pub const N_STAT: usize = 10;
/// Base features per window.
pub const N_BASE: usize = N_HRV + N_ACTI + 2 * N_STAT;
/// Summary statistics per base feature.
pub const N_SUMMARY: usize = 13;
pub const N_FEATURES: usize = N_BASE * N_SUMMARY;
pub const WINDOWS_PER_SEGMENT: usize = 72;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub coverage: CoverageConfig,
    /// Valid windows a base feature needs for its summary to be valid.
    pub min_valid_windows: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            coverage: CoverageConfig::default(),
            min_valid_windows: DEFAULT_MIN_VALID_WINDOWS,
        }
    }
}

/// Modality that produces base feature `base`.
pub fn base_modality(base: usize) -> Modality {
    match base {
        b if b < N_HRV => Modality::Rr,
        b if b < N_HRV + N_ACTI => Modality::Accel,
        b if b < N_HRV + N_ACTI + N_STAT => Modality::Temp,
        _ => Modality::Resp,
    }
}

/// Range of base-feature indices produced by `modality`.
pub fn base_range(modality: Modality) -> std::ops::Range<usize> {
    match modality {
        Modality::Rr => 0..N_HRV,
        Modality::Accel => N_HRV..N_HRV + N_ACTI,
        Modality::Temp => N_HRV + N_ACTI..N_HRV + N_ACTI + N_STAT,
        Modality::Resp => N_HRV + N_ACTI + N_STAT..N_BASE,
    }
}

pub fn base_name(base: usize) -> String {
    let m = base_modality(base);
    let local = base - base_range(m).start;
    match m {
        Modality::Rr => hrv::HRV_NAMES[local].to_string(),
        Modality::Accel => actigraphy::ACTI_NAMES[local].to_string(),
        Modality::Temp => format!("TEMP_{}", STAT10_NAMES[local]),
        Modality::Resp => format!("RESP_{}", STAT10_NAMES[local]),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureInfo {
    pub index: usize,
    pub base_feature: String,
    /// `ECG`, `ACCEL`, `TEMP` or `RESP`.
    pub modality: String,
    pub statistic: String,
}

/// Metadata for the 754 segment-level dimensions.
pub fn feature_meta() -> &'static [FeatureInfo] {
    static META: OnceLock<Vec<FeatureInfo>> = OnceLock::new();
    META.get_or_init(|| {
        (0..N_FEATURES)
            .map(|index| {
                let base = index / N_SUMMARY;
                FeatureInfo {
                    index,
                    base_feature: base_name(base),
                    modality: base_modality(base).feature_tag().to_string(),
                    statistic: STAT13_NAMES[index % N_SUMMARY].to_string(),
                }
            })
            .collect()
    })
}

/// One five-minute window of a segment.
#[derive(Debug, Clone)]
pub struct Window<'a> {
    pub index: usize,
    pub start_ms: i64,
    pub streams: [StreamSlice<'a>; 4],
    /// Indexed by [`Modality::index`].
    pub valid: [bool; 4],
}

impl Window<'_> {
    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }
}

pub fn slice_windows<'a>(segment: &Segment<'a>, config: &CoverageConfig) -> Vec<Window<'a>> {
    (0..WINDOWS_PER_SEGMENT)
        .map(|index| {
            let start_ms = segment.start_ms + index as i64 * WINDOW_MS;
            let end = start_ms + WINDOW_MS;
            let streams = Modality::ALL.map(|m| segment.stream(m).clip(start_ms, end));
            let valid = Modality::ALL.map(|m| config.window_valid(m, &streams[m.index()]));
            Window {
                index,
                start_ms,
                streams,
                valid,
            }
        })
        .collect()
}

/// 58 base features for one window; cells of invalid modalities are `NaN`.
pub fn window_features(window: &Window<'_>) -> [f64; N_BASE] {
    let mut out = [f64::NAN; N_BASE];
    for m in Modality::ALL {
        if !window.valid[m.index()] {
            continue;
        }
        let slice = &window.streams[m.index()];
        let dst = &mut out[base_range(m)];
        match m {
            Modality::Rr => dst.copy_from_slice(&hrv::hrv30(slice.values)),
            Modality::Accel => dst.copy_from_slice(&actigraphy::acti8(slice)),
            Modality::Temp | Modality::Resp => dst.copy_from_slice(&stat10(slice.values)),
        }
    }
    out
}

/// Base features over time for one segment, `D = 58` rows by `T` windows.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFeatureMatrix {
    /// Window-major: `cells[t * N_BASE + d]`.
    cells: Vec<f64>,
    mask: Vec<bool>,
    windows: usize,
}

impl WindowFeatureMatrix {
    pub fn from_windows(windows: &[Window<'_>]) -> Self {
        let mut cells = Vec::with_capacity(windows.len() * N_BASE);
        let mut mask = Vec::with_capacity(windows.len() * N_BASE);
        for w in windows {
            let f = window_features(w);
            for (d, v) in f.iter().enumerate() {
                mask.push(w.valid[base_modality(d).index()] && v.is_finite());
            }
            cells.extend_from_slice(&f);
        }
        Self {
            cells,
            mask,
            windows: windows.len(),
        }
    }

    pub fn rows(&self) -> usize {
        N_BASE
    }

    pub fn windows(&self) -> usize {
        self.windows
    }

    pub fn get(&self, d: usize, t: usize) -> f64 {
        self.cells[t * N_BASE + d]
    }

    pub fn is_valid(&self, d: usize, t: usize) -> bool {
        self.mask[t * N_BASE + d]
    }

    /// Valid values of base feature `d`, in window order.
    pub fn valid_series(&self, d: usize) -> Vec<f64> {
        (0..self.windows)
            .filter(|&t| self.is_valid(d, t))
            .map(|t| self.get(d, t))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Segment-level features with their label.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub subject_id: String,
    pub segment_start_ms: i64,
    pub score: u8,
    pub features: FeatureVector,
    /// Windows in which every modality is valid.
    pub valid_windows: usize,
    /// Valid windows per modality, indexed by [`Modality::index`].
    pub modality_windows: [usize; 4],
}

/// Why a segment produced no data point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rejected {
    pub modality_windows: [usize; 4],
}

pub fn segment_features(
    segment: &Segment<'_>,
    config: &FeatureConfig,
) -> Result<DataPoint, Rejected> {
    let windows = slice_windows(segment, &config.coverage);
    let modality_windows =
        Modality::ALL.map(|m| windows.iter().filter(|w| w.valid[m.index()]).count());
    if modality_windows
        .iter()
        .all(|&n| n < config.min_valid_windows)
    {
        return Err(Rejected { modality_windows });
    }
    let valid_windows = windows.iter().filter(|w| w.all_valid()).count();
    let matrix = WindowFeatureMatrix::from_windows(&windows);
    Ok(DataPoint {
        subject_id: segment.subject_id.clone(),
        segment_start_ms: segment.start_ms,
        score: segment.score,
        features: summarise(&matrix, config.min_valid_windows),
        valid_windows,
        modality_windows,
    })
}

/// Applies the 13 summary statistics to every base feature over time.
pub fn summarise(matrix: &WindowFeatureMatrix, min_valid_windows: usize) -> FeatureVector {
    let mut values = Vec::with_capacity(N_FEATURES);
    for d in 0..matrix.rows() {
        values.extend_from_slice(&stat13(&matrix.valid_series(d), min_valid_windows));
    }
    let mask = values.iter().map(|v| v.is_finite()).collect();
    FeatureVector { values, mask }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SampleStream;

    #[test]
    fn meta_counts_per_modality() {
        let meta = feature_meta();
        assert_eq!(meta.len(), 754);
        let count = |tag: &str| meta.iter().filter(|f| f.modality == tag).count();
        assert_eq!(count("ECG"), 390);
        assert_eq!(count("ACCEL"), 104);
        assert_eq!(count("TEMP"), 130);
        assert_eq!(count("RESP"), 130);
        assert_eq!(meta[0].base_feature, "MeanNN");
        assert_eq!(meta[0].statistic, "p10");
        assert_eq!(meta[753].base_feature, "RESP_max_drop");
        assert_eq!(meta[753].statistic, "energy");
    }

    #[test]
    fn empty_segment_gives_72_invalid_windows_and_rejection() {
        let streams = Modality::ALL.map(|m| StreamSlice::empty(m.width()));
        let seg = Segment::new("s", 0, 3, 0, streams);
        let windows = slice_windows(&seg, &CoverageConfig::default());
        assert_eq!(windows.len(), 72);
        assert!(windows.iter().all(|w| w.valid.iter().all(|v| !v)));
        let err = segment_features(&seg, &FeatureConfig::default()).unwrap_err();
        assert_eq!(err.modality_windows, [0; 4]);
    }

    #[test]
    fn temp_only_segment_is_kept_with_temp_dims_valid() {
        let mut temp = SampleStream::new("s", Modality::Temp);
        for i in 0..5400 {
            temp.push(i * 4000, &[33.0 + (i % 7) as f64 * 0.01]);
        }
        let mut streams = Modality::ALL.map(|m| StreamSlice::empty(m.width()));
        streams[Modality::Temp.index()] = temp.as_slice();
        let seg = Segment::new("s", 0, 3, 0, streams);
        let dp = segment_features(&seg, &FeatureConfig::default()).unwrap();
        assert_eq!(dp.features.len(), 754);
        assert_eq!(dp.features.valid_count(), 130);
        assert_eq!(dp.modality_windows, [0, 0, 72, 0]);
        assert_eq!(dp.valid_windows, 0);
        let temp_dims = base_range(Modality::Temp).start * 13..base_range(Modality::Temp).end * 13;
        assert!(temp_dims.clone().all(|i| dp.features.mask[i]));
    }
}
