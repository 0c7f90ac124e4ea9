//! Raw input parsing and 6-hour segmentation.
//!
//! Input files are UTF-8 CSV with a fixed header per kind:
//!
//! | file          | header                               |
//! |---------------|--------------------------------------|
//! | `subjects.csv`| `subject_id,age,bmi`                 |
//! | `rr.csv`      | `subject_id,timestamp_ms,value`      |
//! | `temp.csv`    | `subject_id,timestamp_ms,value`      |
//! | `resp.csv`    | `subject_id,timestamp_ms,value`      |
//! | `accel.csv`   | `subject_id,timestamp_ms,x,y,z`      |
//! | `labels.csv`  | `subject_id,slot_start_ms,score`     |

mod coverage;
mod parse;
mod segment;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use coverage::{coverage, CoverageConfig, CoverageReport, NominalRates, WINDOW_MS};
pub use parse::{parse_labels, parse_stream, parse_subjects, ParseStats, ParsedStreams};
pub use segment::{build_segments, LabelAlignment, Segment, Slot, StreamSlice};

pub const MINUTE_MS: i64 = 60_000;
pub const HOUR_MS: i64 = 60 * MINUTE_MS;
pub const SEGMENT_MS: i64 = 6 * HOUR_MS;
pub const DAY_MS: i64 = 24 * HOUR_MS;

/// RR intervals outside this open range (ms) are dropped while parsing.
pub const RR_BOUNDS_MS: (f64, f64) = (200.0, 3000.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modality {
    /// RR intervals derived from the ECG. Reported as `ECG` in feature tags.
    Rr,
    Accel,
    Temp,
    Resp,
}

impl Modality {
    pub const ALL: [Modality; 4] = [
        Modality::Rr,
        Modality::Accel,
        Modality::Temp,
        Modality::Resp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Number of value columns per sample.
    pub fn width(self) -> usize {
        match self {
            Modality::Accel => 3,
            _ => 1,
        }
    }

    /// Name used when tagging derived features.
    pub fn feature_tag(self) -> &'static str {
        match self {
            Modality::Rr => "ECG",
            Modality::Accel => "ACCEL",
            Modality::Temp => "TEMP",
            Modality::Resp => "RESP",
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            Modality::Rr => "rr",
            Modality::Accel => "accel",
            Modality::Temp => "temp",
            Modality::Resp => "resp",
        }
    }

    pub(crate) fn value_columns(self) -> &'static [&'static str] {
        match self {
            Modality::Accel => &["x", "y", "z"],
            _ => &["value"],
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Rr => "RR",
            Modality::Accel => "ACCEL",
            Modality::Temp => "TEMP",
            Modality::Resp => "RESP",
        })
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rr" | "ecg" => Ok(Modality::Rr),
            "accel" | "acc" | "actigraphy" => Ok(Modality::Accel),
            "temp" | "temperature" => Ok(Modality::Temp),
            "resp" | "respiration" => Ok(Modality::Resp),
            _ => Err(Error::UnknownModality(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub age: u32,
    pub bmi: f64,
}

/// Subjects keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SubjectTable {
    records: BTreeMap<String, SubjectRecord>,
}

impl SubjectTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, record: SubjectRecord) -> Result<(), Error> {
        if self.records.contains_key(&record.subject_id) {
            return Err(Error::DuplicateSubject(record.subject_id));
        }
        self.records.insert(record.subject_id.clone(), record);
        Ok(())
    }

    pub fn get(&self, subject_id: &str) -> Option<&SubjectRecord> {
        self.records.get(subject_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SubjectRecord> {
        self.records.values()
    }
}

impl FromIterator<SubjectRecord> for SubjectTable {
    /// Later duplicates replace earlier ones; use [`SubjectTable::insert`] to reject them.
    fn from_iter<I: IntoIterator<Item = SubjectRecord>>(iter: I) -> Self {
        Self {
            records: iter
                .into_iter()
                .map(|r| (r.subject_id.clone(), r))
                .collect(),
        }
    }
}

/// Time-ordered samples of one modality for one subject.
///
/// Values are stored flat with [`Modality::width`] reals per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub subject_id: String,
    pub modality: Modality,
    pub timestamps: Vec<i64>,
    pub values: Vec<f64>,
}

impl SampleStream {
    pub fn new(subject_id: impl Into<String>, modality: Modality) -> Self {
        Self {
            subject_id: subject_id.into(),
            modality,
            timestamps: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Appends a sample if it keeps timestamps strictly increasing.
    pub fn push(&mut self, timestamp_ms: i64, values: &[f64]) -> bool {
        debug_assert_eq!(values.len(), self.modality.width());
        if self
            .timestamps
            .last()
            .is_some_and(|&last| timestamp_ms <= last)
        {
            return false;
        }
        self.timestamps.push(timestamp_ms);
        self.values.extend_from_slice(values);
        true
    }

    pub fn as_slice(&self) -> StreamSlice<'_> {
        StreamSlice {
            timestamps: &self.timestamps,
            values: &self.values,
            width: self.modality.width(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FatigueLabel {
    pub subject_id: String,
    pub slot_start_ms: i64,
    pub score: u8,
}

/// All streams of every subject.
#[derive(Debug, Clone, Default)]
pub struct Recordings {
    subjects: BTreeMap<String, [SampleStream; 4]>,
}

impl Recordings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds every per-subject stream of one modality, replacing earlier data for the same pair.
    pub fn add(&mut self, streams: impl IntoIterator<Item = SampleStream>) {
        for stream in streams {
            let slot = self
                .subjects
                .entry(stream.subject_id.clone())
                .or_insert_with_key(|id| Modality::ALL.map(|m| SampleStream::new(id.clone(), m)));
            let idx = stream.modality.index();
            slot[idx] = stream;
        }
    }

    pub fn stream(&self, subject_id: &str, modality: Modality) -> Option<&SampleStream> {
        self.subjects.get(subject_id).map(|s| &s[modality.index()])
    }

    pub fn subject_ids(&self) -> impl Iterator<Item = &str> {
        self.subjects.keys().map(String::as_str)
    }

    pub fn total_samples(&self, modality: Modality) -> usize {
        self.subjects
            .values()
            .map(|s| s[modality.index()].len())
            .sum()
    }
}
