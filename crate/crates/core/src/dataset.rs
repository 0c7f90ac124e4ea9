//! Tabular feature data shared by the models and the evaluation harness.
//!
//! CSV layout: `subject_id,segment_start_ms,score[,cluster],f0..f{p-1}`.
//! Invalid feature values are written as `NaN`. The optional `cluster` column
//! carries externally known group labels (used by synthetic benchmarks).

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::features::DataPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub subject_ids: Vec<String>,
    pub segment_starts: Vec<i64>,
    pub y: Vec<f64>,
    /// n x p, `NaN` marks missing values.
    pub x: DMatrix<f64>,
    pub clusters: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        subject_ids: Vec<String>,
        segment_starts: Vec<i64>,
        y: Vec<f64>,
        x: DMatrix<f64>,
        clusters: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = y.len();
        if subject_ids.len() != n || segment_starts.len() != n || x.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.nrows().min(subject_ids.len()).min(segment_starts.len()),
            });
        }
        if let Some(c) = &clusters {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
        }
        Ok(Self {
            subject_ids,
            segment_starts,
            y,
            x,
            clusters,
        })
    }

    pub fn from_points(points: &[DataPoint]) -> Self {
        let p = points.first().map_or(0, |d| d.features.len());
        let x = DMatrix::from_fn(points.len(), p, |i, j| points[i].features.values[j]);
        Self {
            subject_ids: points.iter().map(|d| d.subject_id.clone()).collect(),
            segment_starts: points.iter().map(|d| d.segment_start_ms).collect(),
            y: points.iter().map(|d| f64::from(d.score)).collect(),
            x,
            clusters: None,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            subject_ids: rows.iter().map(|&i| self.subject_ids[i].clone()).collect(),
            segment_starts: rows.iter().map(|&i| self.segment_starts[i]).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            x: self.x.select_rows(rows),
            clusters: self
                .clusters
                .as_ref()
                .map(|c| rows.iter().map(|&i| c[i].clone()).collect()),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        write!(w, "subject_id,segment_start_ms,score")?;
        if self.clusters.is_some() {
            write!(w, ",cluster")?;
        }
        for j in 0..self.n_features() {
            write!(w, ",f{j}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(
                w,
                "{},{},{}",
                self.subject_ids[i], self.segment_starts[i], self.y[i]
            )?;
            if let Some(c) = &self.clusters {
                write!(w, ",{}", c[i])?;
            }
            for j in 0..self.n_features() {
                write!(w, ",{}", self.x[(i, j)])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.len() < 3 || cols[..3] != ["subject_id", "segment_start_ms", "score"] {
            return Err(Error::schema(
                path,
                "expected header starting `subject_id,segment_start_ms,score`",
            ));
        }
        let has_cluster = cols.get(3) == Some(&"cluster");
        let first_feature = if has_cluster { 4 } else { 3 };
        for (j, c) in cols[first_feature..].iter().enumerate() {
            if *c != format!("f{j}") {
                return Err(Error::schema(
                    path,
                    format!("column `{c}` should be `f{j}`"),
                ));
            }
        }
        let p = cols.len() - first_feature;

        let mut subject_ids = Vec::new();
        let mut starts = Vec::new();
        let mut y = Vec::new();
        let mut clusters = Vec::new();
        let mut data = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let row = rec.position().map_or(0, |p| p.line());
            let bad = |field: &str, v: &str| Error::Field {
                path: path.to_path_buf(),
                row,
                field: field.to_string(),
                message: format!("cannot parse `{v}`"),
            };
            subject_ids.push(rec[0].to_string());
            starts.push(
                rec[1]
                    .parse()
                    .map_err(|_| bad("segment_start_ms", &rec[1]))?,
            );
            let score: f64 = rec[2].parse().map_err(|_| bad("score", &rec[2]))?;
            if !score.is_finite() {
                return Err(bad("score", &rec[2]));
            }
            y.push(score);
            if has_cluster {
                clusters.push(rec[3].to_string());
            }
            for j in 0..p {
                let v = &rec[first_feature + j];
                data.push(v.parse::<f64>().map_err(|_| bad(&format!("f{j}"), v))?);
            }
        }
        let n = y.len();
        let x = DMatrix::from_row_slice(n, p, &data);
        Dataset::new(subject_ids, starts, y, x, has_cluster.then_some(clusters))
    }
}

/// Writes extracted data points as `features.csv`.
pub fn write_points_csv(path: impl AsRef<Path>, points: &[DataPoint]) -> Result<()> {
    Dataset::from_points(points).write_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_nan_and_bits() {
        let x = DMatrix::from_row_slice(2, 3, &[0.1, f64::NAN, 1e-300, -2.5, 1.0 / 3.0, 7.0]);
        let ds = Dataset::new(
            vec!["a".into(), "b".into()],
            vec![0, 21_600_000],
            vec![3.0, 4.25],
            x,
            Some(vec!["c1".into(), "c2".into()]),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        ds.write_csv(&p).unwrap();
        let back = Dataset::read_csv(&p).unwrap();
        assert_eq!(back.y, ds.y);
        assert_eq!(back.clusters, ds.clusters);
        for (a, b) in back.x.iter().zip(ds.x.iter()) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }

    #[test]
    fn bad_header_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "id,score,f0\n").unwrap();
        assert!(matches!(Dataset::read_csv(&p), Err(Error::Schema { .. })));
    }
}
