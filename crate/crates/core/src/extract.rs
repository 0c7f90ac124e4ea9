//! Raw CSV bundle → segment feature vectors, with an audit log.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{segment_features, DataPoint, FeatureConfig, WINDOWS_PER_SEGMENT};
use crate::ingest::{
    build_segments, coverage, parse_labels, parse_stream, parse_subjects, LabelAlignment,
    Modality, ParseStats, Recordings,
};

/// Locations of one raw bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPaths {
    /// Optional: extraction works without demographics.
    pub subjects: Option<PathBuf>,
    pub rr: PathBuf,
    pub accel: PathBuf,
    pub temp: PathBuf,
    pub resp: PathBuf,
    pub labels: PathBuf,
}

impl InputPaths {
    /// The standard file names inside `dir`; `subjects.csv` only if present.
    pub fn in_dir(dir: &Path) -> Self {
        let subjects = dir.join("subjects.csv");
        Self {
            subjects: subjects.exists().then_some(subjects),
            rr: dir.join("rr.csv"),
            accel: dir.join("accel.csv"),
            temp: dir.join("temp.csv"),
            resp: dir.join("resp.csv"),
            labels: dir.join("labels.csv"),
        }
    }

    pub fn stream(&self, m: Modality) -> &Path {
        match m {
            Modality::Rr => &self.rr,
            Modality::Accel => &self.accel,
            Modality::Temp => &self.temp,
            Modality::Resp => &self.resp,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractSettings {
    /// Minutes east of UTC, applied to every timestamp.
    pub tz_offset_min: i32,
    pub label_alignment: LabelAlignment,
    pub features: FeatureConfig,
}

/// Segment counts over ten equal-width coverage bins `[0, 0.1), …, [0.9, 1]`.
pub type Histogram = [usize; 10];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamLog {
    pub modality: Modality,
    pub file: PathBuf,
    pub stats: ParseStats,
    pub subjects: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionLog {
    pub settings: ExtractSettings,
    pub n_subjects_table: Option<usize>,
    pub streams: Vec<StreamLog>,
    pub labels: usize,
    pub segments: usize,
    pub accepted: usize,
    /// Segments without a single sample of any modality.
    pub rejected_empty: usize,
    /// Segments with samples but too few valid windows in every modality.
    pub rejected_coverage: usize,
    /// Subjects with recordings (or demographics) but no labels.
    pub subjects_without_labels: Vec<String>,
    /// Per-modality histogram of segment coverage fractions, keyed by tag.
    pub coverage_histograms: BTreeMap<String, Histogram>,
    /// Accepted segments by number of windows valid in every modality.
    pub valid_windows: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub points: Vec<DataPoint>,
    pub log: ExtractionLog,
}

fn bin(fraction: f64) -> usize {
    ((fraction * 10.0).floor() as usize).min(9)
}

/// Parses the bundle, segments it and extracts one data point per usable
/// segment. Segments are processed in parallel; output order is by subject,
/// then segment start, independent of thread count.
pub fn extract(inputs: &InputPaths, settings: &ExtractSettings) -> Result<Extraction> {
    let table = inputs.subjects.as_deref().map(parse_subjects).transpose()?;
    let labels = parse_labels(&inputs.labels)?;

    let mut recordings = Recordings::new();
    let mut stream_logs = Vec::new();
    for m in Modality::ALL {
        let parsed = parse_stream(inputs.stream(m), m)?;
        info!(
            "{}: kept {} of {} rows for {} subjects",
            inputs.stream(m).display(),
            parsed.stats.kept(),
            parsed.stats.rows,
            parsed.streams.len()
        );
        stream_logs.push(StreamLog {
            modality: m,
            file: inputs.stream(m).to_path_buf(),
            stats: parsed.stats,
            subjects: parsed.streams.len(),
        });
        recordings.add(parsed.streams.into_values());
    }

    let labelled: BTreeSet<&str> = labels.iter().map(|l| l.subject_id.as_str()).collect();
    let mut known: BTreeSet<&str> = recordings.subject_ids().collect();
    if let Some(t) = &table {
        known.extend(t.iter().map(|r| r.subject_id.as_str()));
    }
    let subjects_without_labels: Vec<String> = known
        .difference(&labelled)
        .map(|s| s.to_string())
        .collect();
    for s in &subjects_without_labels {
        warn!("subject {s} has no labels and contributes no data points");
    }

    let segments = build_segments(
        &recordings,
        &labels,
        settings.tz_offset_min,
        settings.label_alignment,
    )?;
    let results: Vec<_> = segments
        .par_iter()
        .map(|seg| {
            let cov = coverage(seg, &settings.features.coverage);
            (seg.is_empty(), cov, segment_features(seg, &settings.features))
        })
        .collect();

    let mut coverage_histograms: BTreeMap<String, Histogram> = Modality::ALL
        .iter()
        .map(|m| (m.feature_tag().to_string(), [0; 10]))
        .collect();
    let mut valid_windows = BTreeMap::new();
    let (mut rejected_empty, mut rejected_coverage) = (0, 0);
    let mut points = Vec::with_capacity(results.len());
    for (empty, cov, result) in results {
        for m in Modality::ALL {
            coverage_histograms
                .get_mut(m.feature_tag())
                .expect("every modality has a histogram")[bin(cov.fraction(m))] += 1;
        }
        match result {
            Ok(point) => {
                debug_assert!(point.valid_windows <= WINDOWS_PER_SEGMENT);
                *valid_windows.entry(point.valid_windows).or_insert(0) += 1;
                points.push(point);
            }
            Err(_) if empty => rejected_empty += 1,
            Err(_) => rejected_coverage += 1,
        }
    }
    info!(
        "{} segments: {} accepted, {} empty, {} below coverage",
        segments.len(),
        points.len(),
        rejected_empty,
        rejected_coverage
    );

    let log = ExtractionLog {
        settings: *settings,
        n_subjects_table: table.as_ref().map(|t| t.len()),
        streams: stream_logs,
        labels: labels.len(),
        segments: segments.len(),
        accepted: points.len(),
        rejected_empty,
        rejected_coverage,
        subjects_without_labels,
        coverage_histograms,
        valid_windows,
    };
    Ok(Extraction { points, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_bins_close_at_one() {
        assert_eq!(bin(0.0), 0);
        assert_eq!(bin(0.099), 0);
        assert_eq!(bin(0.5), 5);
        assert_eq!(bin(1.0), 9);
    }
}
