use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use log::warn;
use serde::Serialize;

use super::{FatigueLabel, Modality, SampleStream, SubjectRecord, SubjectTable, RR_BOUNDS_MS};
use crate::error::{Error, Result};

/// Row accounting for one stream file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParseStats {
    pub rows: u64,
    pub unparseable: u64,
    pub out_of_range: u64,
    pub non_monotonic: u64,
}

impl ParseStats {
    pub fn kept(&self) -> u64 {
        self.rows - self.unparseable - self.out_of_range - self.non_monotonic
    }
}

#[derive(Debug, Clone)]
pub struct ParsedStreams {
    pub modality: Modality,
    pub streams: BTreeMap<String, SampleStream>,
    pub stats: ParseStats,
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(reader(file))
}

fn reader<R: io::Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn check_header<R: io::Read>(
    rdr: &mut csv::Reader<R>,
    path: &Path,
    expected: &[&str],
) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::schema(
            path,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(())
}

fn field_error(path: &Path, row: u64, field: &str, message: impl Into<String>) -> Error {
    Error::Field {
        path: path.to_path_buf(),
        row,
        field: field.to_string(),
        message: message.into(),
    }
}

fn row_number(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Reads `subject_id,age,bmi`. Every malformed row is an error.
pub fn parse_subjects(path: impl AsRef<Path>) -> Result<SubjectTable> {
    let path = path.as_ref();
    let mut rdr = open(path)?;
    check_header(&mut rdr, path, &["subject_id", "age", "bmi"])?;
    let mut table = SubjectTable::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let row = row_number(&record);
        if record.len() != 3 {
            return Err(field_error(
                path,
                row,
                "*",
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let subject_id = record[0].to_string();
        if subject_id.is_empty() {
            return Err(field_error(path, row, "subject_id", "empty"));
        }
        let age: i64 = record[1].parse().map_err(|_| {
            field_error(
                path,
                row,
                "age",
                format!("`{}` is not an integer", &record[1]),
            )
        })?;
        if !(1..130).contains(&age) {
            return Err(field_error(
                path,
                row,
                "age",
                format!("{age} outside (0, 130)"),
            ));
        }
        let bmi: f64 = record[2].parse().map_err(|_| {
            field_error(
                path,
                row,
                "bmi",
                format!("`{}` is not a number", &record[2]),
            )
        })?;
        if !(bmi > 5.0 && bmi < 100.0) {
            return Err(field_error(
                path,
                row,
                "bmi",
                format!("{bmi} outside (5, 100)"),
            ));
        }
        table.insert(SubjectRecord {
            subject_id,
            age: age as u32,
            bmi,
        })?;
    }
    if table.is_empty() {
        warn!("{}: no subjects", path.display());
    }
    Ok(table)
}

/// Reads `subject_id,slot_start_ms,score`. Slot alignment is checked later,
/// when segments are built with the dataset's timezone offset.
pub fn parse_labels(path: impl AsRef<Path>) -> Result<Vec<FatigueLabel>> {
    let path = path.as_ref();
    let mut rdr = open(path)?;
    check_header(&mut rdr, path, &["subject_id", "slot_start_ms", "score"])?;
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let row = row_number(&record);
        if record.len() != 3 {
            return Err(field_error(
                path,
                row,
                "*",
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let slot_start_ms: i64 = record[1].parse().map_err(|_| {
            field_error(
                path,
                row,
                "slot_start_ms",
                format!("`{}` is not an integer", &record[1]),
            )
        })?;
        let score: i64 = record[2].parse().map_err(|_| {
            field_error(
                path,
                row,
                "score",
                format!("`{}` is not an integer", &record[2]),
            )
        })?;
        if !(0..=10).contains(&score) {
            return Err(field_error(
                path,
                row,
                "score",
                format!("{score} outside 0..=10"),
            ));
        }
        labels.push(FatigueLabel {
            subject_id: record[0].to_string(),
            slot_start_ms,
            score: score as u8,
        });
    }
    Ok(labels)
}

/// Reads one modality file into per-subject streams.
///
/// Rows that fail to parse are tolerated up to 1% of the file; RR values
/// outside [`RR_BOUNDS_MS`] and samples whose timestamp does not exceed the
/// previous one (per subject, in file order) are dropped and counted.
pub fn parse_stream(path: impl AsRef<Path>, modality: Modality) -> Result<ParsedStreams> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_stream_from(io::BufReader::with_capacity(1 << 20, file), path, modality)
}

pub(crate) fn parse_stream_from<R: io::Read>(
    input: R,
    path: &Path,
    modality: Modality,
) -> Result<ParsedStreams> {
    let mut rdr = reader(input);
    let mut expected = vec!["subject_id", "timestamp_ms"];
    expected.extend_from_slice(modality.value_columns());
    check_header(&mut rdr, path, &expected)?;

    let width = modality.width();
    let mut streams: BTreeMap<String, SampleStream> = BTreeMap::new();
    let mut stats = ParseStats::default();
    let mut record = csv::ByteRecord::new();
    let mut values = [0.0f64; 3];

    loop {
        match rdr.read_byte_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) if e.is_io_error() => return Err(Error::csv(path, e)),
            Err(_) => {
                stats.rows += 1;
                stats.unparseable += 1;
                continue;
            }
        }
        stats.rows += 1;
        let Some((subject, ts)) = parse_sample(&record, width, &mut values) else {
            stats.unparseable += 1;
            continue;
        };
        if modality == Modality::Rr && !(values[0] > RR_BOUNDS_MS.0 && values[0] < RR_BOUNDS_MS.1) {
            stats.out_of_range += 1;
            continue;
        }
        let stream = match streams.get_mut(subject) {
            Some(s) => s,
            None => streams
                .entry(subject.to_string())
                .or_insert_with(|| SampleStream::new(subject, modality)),
        };
        if !stream.push(ts, &values[..width]) {
            stats.non_monotonic += 1;
        }
    }

    if stats.unparseable * 100 > stats.rows {
        return Err(Error::TooManyBadRows {
            path: path.to_path_buf(),
            bad: stats.unparseable,
            total: stats.rows,
        });
    }
    if stats.unparseable > 0 {
        warn!(
            "{}: skipped {} unparseable rows of {}",
            path.display(),
            stats.unparseable,
            stats.rows
        );
    }
    Ok(ParsedStreams {
        modality,
        streams,
        stats,
    })
}

fn parse_sample<'r>(
    record: &'r csv::ByteRecord,
    width: usize,
    values: &mut [f64; 3],
) -> Option<(&'r str, i64)> {
    if record.len() != 2 + width {
        return None;
    }
    let subject = std::str::from_utf8(&record[0]).ok()?;
    if subject.is_empty() {
        return None;
    }
    let ts: i64 = std::str::from_utf8(&record[1]).ok()?.parse().ok()?;
    for (k, v) in values.iter_mut().take(width).enumerate() {
        let x: f64 = std::str::from_utf8(&record[2 + k]).ok()?.parse().ok()?;
        if !x.is_finite() {
            return None;
        }
        *v = x;
    }
    Some((subject, ts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn rr_passthrough() {
        let f = write_tmp("subject_id,timestamp_ms,value\ns1,0,800\ns1,800,810\n");
        let parsed = parse_stream(f.path(), Modality::Rr).unwrap();
        let s = &parsed.streams["s1"];
        assert_eq!(s.timestamps, vec![0, 800]);
        assert_eq!(s.values, vec![800.0, 810.0]);
        assert_eq!(parsed.stats.kept(), 2);
    }

    #[test]
    fn rr_out_of_range_dropped() {
        let f = write_tmp("subject_id,timestamp_ms,value\ns1,0,800\ns1,800,5000\ns1,1600,790\n");
        let parsed = parse_stream(f.path(), Modality::Rr).unwrap();
        assert_eq!(parsed.stats.out_of_range, 1);
        assert_eq!(parsed.streams["s1"].len(), 2);
    }

    #[test]
    fn accel_with_two_value_columns_is_schema_error() {
        let f = write_tmp("subject_id,timestamp_ms,x,y\ns1,0,0.1,0.2\n");
        let err = parse_stream(f.path(), Modality::Accel).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }), "{err}");
    }

    #[test]
    fn duplicate_and_retrograde_timestamps_dropped() {
        let f = write_tmp(
            "subject_id,timestamp_ms,value\na,0,33\na,4000,33.1\na,4000,33.2\na,2000,33.3\na,8000,33\nb,0,32\n",
        );
        let parsed = parse_stream(f.path(), Modality::Temp).unwrap();
        assert_eq!(parsed.stats.non_monotonic, 2);
        assert_eq!(parsed.streams["a"].timestamps, vec![0, 4000, 8000]);
        assert_eq!(parsed.streams["b"].len(), 1);
    }

    #[test]
    fn bad_rows_tolerated_up_to_one_percent() {
        let mut body = String::from("subject_id,timestamp_ms,value\n");
        for i in 0..200 {
            body.push_str(&format!("s,{},33\n", i * 4000));
        }
        body.push_str("s,oops,33\n");
        let f = write_tmp(&body);
        let parsed = parse_stream(f.path(), Modality::Temp).unwrap();
        assert_eq!(parsed.stats.unparseable, 1);

        body.push_str("s,999999999,nan\ns,1,\n");
        let f = write_tmp(&body);
        assert!(matches!(
            parse_stream(f.path(), Modality::Temp),
            Err(Error::TooManyBadRows { bad: 3, .. })
        ));
    }

    #[test]
    fn subjects_parse_and_validate() {
        let mut body = String::from("subject_id,age,bmi\n");
        for i in 0..21 {
            body.push_str(&format!("p{i:02},{},{}\n", 30 + i, 20.5 + i as f64 * 0.5));
        }
        let f = write_tmp(&body);
        assert_eq!(parse_subjects(f.path()).unwrap().len(), 21);

        let f = write_tmp("subject_id,age,bmi\n");
        assert!(parse_subjects(f.path()).unwrap().is_empty());

        let f = write_tmp("subject_id,age,bmi\np1,40,22\np2,-5,22\n");
        match parse_subjects(f.path()).unwrap_err() {
            Error::Field { row, field, .. } => {
                assert_eq!(row, 3);
                assert_eq!(field, "age");
            }
            e => panic!("unexpected {e}"),
        }

        let f = write_tmp("subject_id,age,bmi\np1,40,22\np1,41,23\n");
        assert!(matches!(
            parse_subjects(f.path()),
            Err(Error::DuplicateSubject(_))
        ));

        let f = write_tmp("subject_id,age,bmi\np1,forty,22\n");
        assert!(matches!(parse_subjects(f.path()), Err(Error::Field { .. })));
    }

    #[test]
    fn labels_reject_bad_scores() {
        let f = write_tmp("subject_id,slot_start_ms,score\ns,0,11\n");
        assert!(matches!(parse_labels(f.path()), Err(Error::Field { .. })));
        let f = write_tmp("subject_id,slot_start_ms,score\ns,0,7\n");
        assert_eq!(parse_labels(f.path()).unwrap()[0].score, 7);
    }
}
