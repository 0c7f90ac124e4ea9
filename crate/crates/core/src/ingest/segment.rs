use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FatigueLabel, Modality, Recordings, DAY_MS, MINUTE_MS, SEGMENT_MS};
use crate::error::{Error, Result};

/// Daily report slot, in local time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Slot {
    /// 00:00-06:00, attached to the calendar day it starts in.
    Night,
    Morning,
    Afternoon,
    Evening,
}

impl Slot {
    fn from_index(i: i64) -> Slot {
        match i {
            0 => Slot::Night,
            1 => Slot::Morning,
            2 => Slot::Afternoon,
            _ => Slot::Evening,
        }
    }
}

/// How label timestamps that are not on a slot boundary are treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelAlignment {
    /// Off-boundary timestamps are an error.
    #[default]
    Strict,
    /// Off-boundary timestamps are floored to the enclosing slot.
    Floor,
}

/// Borrowed view of the samples of one modality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamSlice<'a> {
    pub timestamps: &'a [i64],
    pub values: &'a [f64],
    pub width: usize,
}

impl<'a> StreamSlice<'a> {
    pub fn empty(width: usize) -> Self {
        Self {
            timestamps: &[],
            values: &[],
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Samples with `start <= t < end`.
    pub fn clip(&self, start: i64, end: i64) -> StreamSlice<'a> {
        let lo = self.timestamps.partition_point(|&t| t < start);
        let hi = self.timestamps.partition_point(|&t| t < end);
        StreamSlice {
            timestamps: &self.timestamps[lo..hi],
            values: &self.values[lo * self.width..hi * self.width],
            width: self.width,
        }
    }

    /// Column `k` of the values.
    pub fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(k).step_by(self.width).copied()
    }

    pub fn sample(&self, i: usize) -> &'a [f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }
}

/// One labelled 6-hour block of a subject's recordings.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<'a> {
    pub subject_id: String,
    pub slot: Slot,
    /// Local calendar day index (days since the epoch, after the timezone shift).
    pub local_day: i64,
    pub start_ms: i64,
    pub end_ms: i64,
    pub score: u8,
    streams: [StreamSlice<'a>; 4],
}

impl<'a> Segment<'a> {
    pub fn new(
        subject_id: impl Into<String>,
        start_ms: i64,
        score: u8,
        tz_offset_min: i32,
        streams: [StreamSlice<'a>; 4],
    ) -> Self {
        let local = start_ms + tz_offset_min as i64 * MINUTE_MS;
        let end_ms = start_ms + SEGMENT_MS;
        let streams = streams.map(|s| s.clip(start_ms, end_ms));
        Self {
            subject_id: subject_id.into(),
            slot: Slot::from_index(local.rem_euclid(DAY_MS) / SEGMENT_MS),
            local_day: local.div_euclid(DAY_MS),
            start_ms,
            end_ms,
            score,
            streams,
        }
    }

    pub fn stream(&self, modality: Modality) -> StreamSlice<'a> {
        self.streams[modality.index()]
    }

    /// True when no modality has a single sample in the segment.
    pub fn is_empty(&self) -> bool {
        self.streams.iter().all(|s| s.is_empty())
    }
}

fn align(label: &FatigueLabel, tz_offset_min: i32, alignment: LabelAlignment) -> Result<i64> {
    let offset = tz_offset_min as i64 * MINUTE_MS;
    let local = label.slot_start_ms + offset;
    let into_slot = local.rem_euclid(SEGMENT_MS);
    if into_slot == 0 {
        return Ok(label.slot_start_ms);
    }
    match alignment {
        LabelAlignment::Floor => Ok(label.slot_start_ms - into_slot),
        LabelAlignment::Strict => Err(Error::InvalidLabel {
            subject: label.subject_id.clone(),
            slot_start_ms: label.slot_start_ms,
            reason: format!(
                "not a slot boundary ({} min past 00/06/12/18 local)",
                into_slot / MINUTE_MS
            ),
        }),
    }
}

/// Builds one segment per label, sorted by subject then start time.
///
/// Labels of subjects without recordings, or whose slot holds no samples,
/// produce segments for which [`Segment::is_empty`] is true.
pub fn build_segments<'a>(
    recordings: &'a Recordings,
    labels: &[FatigueLabel],
    tz_offset_min: i32,
    alignment: LabelAlignment,
) -> Result<Vec<Segment<'a>>> {
    let mut aligned = Vec::with_capacity(labels.len());
    let mut seen = BTreeSet::new();
    for label in labels {
        let start = align(label, tz_offset_min, alignment)?;
        if !seen.insert((label.subject_id.as_str(), start)) {
            return Err(Error::InvalidLabel {
                subject: label.subject_id.clone(),
                slot_start_ms: label.slot_start_ms,
                reason: "more than one label for this slot".into(),
            });
        }
        aligned.push((label, start));
    }
    aligned.sort_by(|a, b| (&a.0.subject_id, a.1).cmp(&(&b.0.subject_id, b.1)));

    Ok(aligned
        .into_iter()
        .map(|(label, start)| {
            let streams = Modality::ALL.map(|m| {
                recordings
                    .stream(&label.subject_id, m)
                    .map_or(StreamSlice::empty(m.width()), |s| s.as_slice())
            });
            Segment::new(
                label.subject_id.clone(),
                start,
                label.score,
                tz_offset_min,
                streams,
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{SampleStream, HOUR_MS};

    fn temp_stream(subject: &str, from: i64, to: i64, step: i64) -> SampleStream {
        let mut s = SampleStream::new(subject, Modality::Temp);
        let mut t = from;
        while t < to {
            s.push(t, &[33.0]);
            t += step;
        }
        s
    }

    fn label(subject: &str, t: i64, score: u8) -> FatigueLabel {
        FatigueLabel {
            subject_id: subject.into(),
            slot_start_ms: t,
            score,
        }
    }

    #[test]
    fn week_of_labels_gives_28_segments() {
        let mut rec = Recordings::new();
        rec.add([temp_stream("s", 0, 7 * DAY_MS, 4000)]);
        let labels: Vec<_> = (0..28).map(|i| label("s", i * SEGMENT_MS, 3)).collect();
        let segs = build_segments(&rec, &labels, 0, LabelAlignment::Strict).unwrap();
        assert_eq!(segs.len(), 28);
        for s in &segs {
            assert_eq!(s.end_ms - s.start_ms, SEGMENT_MS);
            assert_eq!(s.stream(Modality::Temp).len(), 5400);
            assert!(s
                .stream(Modality::Temp)
                .timestamps
                .iter()
                .all(|&t| t >= s.start_ms && t < s.end_ms));
        }
        assert_eq!(segs[0].slot, Slot::Night);
        assert_eq!(segs[1].slot, Slot::Morning);
        assert_eq!(segs[3].slot, Slot::Evening);
        assert_eq!(segs[4].local_day, 1);
    }

    #[test]
    fn samples_before_slot_give_empty_segment() {
        let mut rec = Recordings::new();
        rec.add([temp_stream("s", 5 * HOUR_MS, 6 * HOUR_MS, 4000)]);
        let segs = build_segments(
            &rec,
            &[label("s", 6 * HOUR_MS, 2)],
            0,
            LabelAlignment::Strict,
        )
        .unwrap();
        assert!(segs[0].is_empty());
        assert_eq!(segs[0].slot, Slot::Morning);
    }

    #[test]
    fn off_boundary_label_is_error_or_floored() {
        let rec = Recordings::new();
        let t = 7 * HOUR_MS + 13 * MINUTE_MS;
        let err = build_segments(&rec, &[label("s", t, 2)], 0, LabelAlignment::Strict).unwrap_err();
        assert!(matches!(err, Error::InvalidLabel { .. }));
        let segs = build_segments(&rec, &[label("s", t, 2)], 0, LabelAlignment::Floor).unwrap();
        assert_eq!(segs[0].start_ms, 6 * HOUR_MS);
    }

    #[test]
    fn timezone_offset_moves_boundaries() {
        let rec = Recordings::new();
        // 05:00 UTC is 06:00 at UTC+1.
        let segs = build_segments(
            &rec,
            &[label("s", 5 * HOUR_MS, 2)],
            60,
            LabelAlignment::Strict,
        )
        .unwrap();
        assert_eq!(segs[0].slot, Slot::Morning);
        assert!(build_segments(
            &rec,
            &[label("s", 5 * HOUR_MS, 2)],
            0,
            LabelAlignment::Strict
        )
        .is_err());
    }

    #[test]
    fn duplicate_slot_labels_rejected() {
        let rec = Recordings::new();
        let labels = [label("s", 0, 1), label("s", 0, 2)];
        assert!(build_segments(&rec, &labels, 0, LabelAlignment::Strict).is_err());
    }

    #[test]
    fn segmentation_is_deterministic_and_never_duplicates() {
        let mut rec = Recordings::new();
        rec.add([
            temp_stream("a", 0, 2 * DAY_MS, 3000),
            temp_stream("b", 0, DAY_MS, 7000),
        ]);
        let labels: Vec<_> = (0..8)
            .map(|i| label("a", i * SEGMENT_MS, 1))
            .chain((0..3).rev().map(|i| label("b", i * SEGMENT_MS, 4)))
            .collect();
        let a = build_segments(&rec, &labels, 0, LabelAlignment::Strict).unwrap();
        let b = build_segments(&rec, &labels, 0, LabelAlignment::Strict).unwrap();
        assert_eq!(a, b);
        let used: usize = a.iter().map(|s| s.stream(Modality::Temp).len()).sum();
        assert!(used <= rec.total_samples(Modality::Temp));
        assert_eq!(a[8].subject_id, "b");
        assert_eq!(a[8].start_ms, 0);
    }
}
