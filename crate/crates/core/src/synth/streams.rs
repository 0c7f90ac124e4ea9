use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Modality, DAY_MS, HOUR_MS, MINUTE_MS, SEGMENT_MS};
use crate::rng::{self, derive_seed};

/// 2024-01-01T00:00:00Z.
pub const DEFAULT_START_MS: i64 = 1_704_067_200_000;
/// Sampling period of the temperature and respiration streams.
pub const VITALS_PERIOD_MS: i64 = 4_000;

const RR_MIN_MS: f64 = 600.0;
const RR_MAX_MS: f64 = 1200.0;
/// Additive fatigue offset per slot (night, morning, afternoon, evening).
const SLOT_FATIGUE: [f64; 4] = [0.4, -0.6, 0.0, 0.6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub n_subjects: usize,
    pub days: usize,
    pub seed: u64,
    /// Fraction of recording time lost to device-off gaps, in `[0, 1)`.
    pub missingness: f64,
    pub accel_hz: f64,
    pub start_ms: i64,
}

impl Default for StreamSpec {
    fn default() -> Self {
        Self {
            n_subjects: 21,
            days: 7,
            seed: 1,
            missingness: 0.0,
            accel_hz: 1.0,
            start_ms: DEFAULT_START_MS,
        }
    }
}

impl StreamSpec {
    fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 || self.days == 0 {
            return Err(Error::InvalidInput(
                "subjects and days must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.missingness) {
            return Err(Error::InvalidInput(format!(
                "missingness {} outside [0, 1)",
                self.missingness
            )));
        }
        if !(self.accel_hz > 0.0 && self.accel_hz <= 1000.0) {
            return Err(Error::InvalidInput(format!(
                "accel rate {} Hz out of range",
                self.accel_hz
            )));
        }
        Ok(())
    }
}

/// Paths of a generated bundle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamBundle {
    pub subjects: PathBuf,
    pub rr: PathBuf,
    pub accel: PathBuf,
    pub temp: PathBuf,
    pub resp: PathBuf,
    pub labels: PathBuf,
    pub n_labels: usize,
    pub accel_hz: f64,
}

impl StreamBundle {
    pub fn stream(&self, m: Modality) -> &Path {
        match m {
            Modality::Rr => &self.rr,
            Modality::Accel => &self.accel,
            Modality::Temp => &self.temp,
            Modality::Resp => &self.resp,
        }
    }
}

struct Writers {
    subjects: BufWriter<File>,
    streams: [BufWriter<File>; 4],
    labels: BufWriter<File>,
}

fn create(path: &Path, header: &str) -> Result<BufWriter<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::with_capacity(1 << 20, file);
    writeln!(w, "{header}").map_err(|e| Error::io(path, e))?;
    Ok(w)
}

/// Per-subject latent traits.
struct Subject {
    id: String,
    /// Fatigue per 6-hour slot.
    fatigue: Vec<f64>,
    rr_base: f64,
    activity: f64,
    temp_base: f64,
    resp_base: f64,
    /// Device-off flag per minute.
    off: Vec<bool>,
}

impl Subject {
    fn fatigue_at(&self, rel_ms: i64) -> f64 {
        let slot = (rel_ms / SEGMENT_MS) as usize;
        self.fatigue[slot.min(self.fatigue.len() - 1)]
    }

    fn is_off(&self, rel_ms: i64) -> bool {
        self.off[(rel_ms / MINUTE_MS) as usize]
    }
}

/// `cos` of the time of day, peaking at 03:00.
fn circadian(rel_ms: i64) -> f64 {
    let hour = (rel_ms.rem_euclid(DAY_MS)) as f64 / HOUR_MS as f64;
    (2.0 * PI * (hour - 3.0) / 24.0).cos()
}

fn dropout_mask(minutes: usize, missingness: f64, rng: &mut impl Rng) -> Vec<bool> {
    let mut off = vec![false; minutes];
    let target = (missingness * minutes as f64).round() as usize;
    let mut lost = 0;
    while lost < target {
        let len = rng.random_range(60..=720).min(minutes);
        let start = rng.random_range(0..=minutes - len);
        for m in &mut off[start..start + len] {
            if !*m {
                *m = true;
                lost += 1;
            }
        }
    }
    off
}

/// Writes `subjects.csv`, `rr.csv`, `accel.csv`, `temp.csv`, `resp.csv` and
/// `labels.csv` into `dir`.
///
/// Scores follow a latent per-slot fatigue state that also lengthens or
/// shortens RR intervals, damps their variability and activity, and nudges
/// temperature and breathing rate. Gaps are whole-device outages, so all
/// modalities drop out together.
pub fn gen_streams(spec: &StreamSpec, dir: &Path) -> Result<StreamBundle> {
    spec.validate()?;
    let bundle = StreamBundle {
        subjects: dir.join("subjects.csv"),
        rr: dir.join("rr.csv"),
        accel: dir.join("accel.csv"),
        temp: dir.join("temp.csv"),
        resp: dir.join("resp.csv"),
        labels: dir.join("labels.csv"),
        n_labels: spec.n_subjects * spec.days * 4,
        accel_hz: spec.accel_hz,
    };
    let mut w = Writers {
        subjects: create(&bundle.subjects, "subject_id,age,bmi")?,
        streams: [
            create(&bundle.rr, "subject_id,timestamp_ms,value")?,
            create(&bundle.accel, "subject_id,timestamp_ms,x,y,z")?,
            create(&bundle.temp, "subject_id,timestamp_ms,value")?,
            create(&bundle.resp, "subject_id,timestamp_ms,value")?,
        ],
        labels: create(&bundle.labels, "subject_id,slot_start_ms,score")?,
    };
    let width = spec.n_subjects.to_string().len().max(2);
    for i in 0..spec.n_subjects {
        let id = format!("S{:0width$}", i + 1);
        write_subject(spec, &id, derive_seed(spec.seed, i as u64), &mut w, &bundle)?;
    }
    let paths = [&bundle.rr, &bundle.accel, &bundle.temp, &bundle.resp];
    for (wr, p) in w.streams.iter_mut().zip(paths) {
        wr.flush().map_err(|e| Error::io(p, e))?;
    }
    w.subjects
        .flush()
        .map_err(|e| Error::io(&bundle.subjects, e))?;
    w.labels.flush().map_err(|e| Error::io(&bundle.labels, e))?;
    Ok(bundle)
}

fn write_subject(
    spec: &StreamSpec,
    id: &str,
    seed: u64,
    w: &mut Writers,
    bundle: &StreamBundle,
) -> Result<()> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut r = rng::child_rng(seed, 0);
    let age: u32 = r.random_range(20..=75);
    let bmi = (r.random_range(18.0..35.0_f64) * 10.0).round() / 10.0;
    writeln!(w.subjects, "{id},{age},{bmi:.1}").map_err(|e| Error::io(&bundle.subjects, e))?;

    let n_slots = spec.days * 4;
    let base = normal.sample(&mut r);
    let mut ar = 0.0;
    let fatigue: Vec<f64> = (0..n_slots)
        .map(|s| {
            ar = 0.6 * ar + 0.7 * normal.sample(&mut r);
            base + SLOT_FATIGUE[s % 4] + ar
        })
        .collect();
    for (s, f) in fatigue.iter().enumerate() {
        let score = (5.0 + 1.5 * f + 0.5 * normal.sample(&mut r))
            .round()
            .clamp(0.0, 10.0) as u8;
        let start = spec.start_ms + s as i64 * SEGMENT_MS;
        writeln!(w.labels, "{id},{start},{score}").map_err(|e| Error::io(&bundle.labels, e))?;
    }
    let minutes = spec.days * (DAY_MS / MINUTE_MS) as usize;
    let subject = Subject {
        id: id.to_string(),
        fatigue,
        rr_base: r.random_range(800.0..950.0),
        activity: r.random_range(0.6..1.4),
        temp_base: r.random_range(32.5..33.5),
        resp_base: r.random_range(14.0..17.0),
        off: dropout_mask(minutes, spec.missingness, &mut r),
    };
    let span = spec.days as i64 * DAY_MS;

    let out = &mut w.streams[Modality::Rr.index()];
    write_rr(
        &subject,
        spec.start_ms,
        span,
        &mut rng::child_rng(seed, 1),
        out,
    )
    .map_err(|e| Error::io(&bundle.rr, e))?;
    let out = &mut w.streams[Modality::Accel.index()];
    write_accel(&subject, spec, span, &mut rng::child_rng(seed, 2), out)
        .map_err(|e| Error::io(&bundle.accel, e))?;
    let out = &mut w.streams[Modality::Temp.index()];
    write_vital(
        &subject,
        spec.start_ms,
        span,
        &mut rng::child_rng(seed, 3),
        out,
        temp_value,
    )
    .map_err(|e| Error::io(&bundle.temp, e))?;
    let out = &mut w.streams[Modality::Resp.index()];
    write_vital(
        &subject,
        spec.start_ms,
        span,
        &mut rng::child_rng(seed, 4),
        out,
        resp_value,
    )
    .map_err(|e| Error::io(&bundle.resp, e))?;
    Ok(())
}

fn write_rr(
    s: &Subject,
    start: i64,
    span: i64,
    r: &mut impl Rng,
    out: &mut impl Write,
) -> std::io::Result<()> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rel = r.random_range(0..1000_i64);
    let mut drift = 0.0;
    while rel < span {
        let f = s.fatigue_at(rel);
        let variability = (1.0 - 0.15 * f).clamp(0.3, 1.6);
        drift = 0.9 * drift + 12.0 * variability * normal.sample(r);
        // respiratory sinus arrhythmia near 0.25 Hz
        let rsa = 25.0 * variability * (2.0 * PI * 0.25 * rel as f64 / 1000.0).sin();
        let mean = s.rr_base + 90.0 * circadian(rel) - 40.0 * f;
        let rr = (mean + drift + rsa).round().clamp(RR_MIN_MS, RR_MAX_MS) as i64;
        rel += rr;
        if rel < span && !s.is_off(rel) {
            writeln!(out, "{},{},{}", s.id, start + rel, rr)?;
        }
    }
    Ok(())
}

fn write_accel(
    s: &Subject,
    spec: &StreamSpec,
    span: i64,
    r: &mut impl Rng,
    out: &mut impl Write,
) -> std::io::Result<()> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let n = (span as f64 / 1000.0 * spec.accel_hz).floor() as i64;
    let (mut theta, mut phi) = (0.3_f64, 0.0_f64);
    let mut burst = false;
    for k in 0..n {
        let rel = (k as f64 * 1000.0 / spec.accel_hz) as i64;
        let hour = rel.rem_euclid(DAY_MS) / HOUR_MS;
        let awake = (7..23).contains(&hour);
        let f = s.fatigue_at(rel);
        let level = if awake {
            (s.activity * (1.0 - 0.15 * f)).max(0.1)
        } else {
            0.05
        };
        let switch = if burst { 0.05 } else { 0.02 * level };
        if r.random::<f64>() < switch {
            burst = !burst;
        }
        let motion = if burst { 0.4 * level } else { 0.02 };
        theta = (theta + 0.02 * normal.sample(r) * (1.0 + 5.0 * motion)).clamp(0.0, PI);
        phi += 0.02 * normal.sample(r) * (1.0 + 5.0 * motion);
        let mag = 1.0 + motion * normal.sample(r).abs();
        let noise = 0.005;
        if !s.is_off(rel) {
            let x = mag * theta.sin() * phi.cos() + noise * normal.sample(r);
            let y = mag * theta.sin() * phi.sin() + noise * normal.sample(r);
            let z = mag * theta.cos() + noise * normal.sample(r);
            writeln!(out, "{},{},{x:.4},{y:.4},{z:.4}", s.id, spec.start_ms + rel)?;
        }
    }
    Ok(())
}

fn temp_value(s: &Subject, rel: i64, noise: f64) -> f64 {
    (s.temp_base + 0.6 * circadian(rel) + 0.2 * s.fatigue_at(rel) + noise).clamp(30.0, 37.0)
}

fn resp_value(s: &Subject, rel: i64, noise: f64) -> f64 {
    (s.resp_base - 1.5 * circadian(rel) + 0.8 * s.fatigue_at(rel) + 4.0 * noise).clamp(12.0, 20.0)
}

fn write_vital(
    s: &Subject,
    start: i64,
    span: i64,
    r: &mut impl Rng,
    out: &mut impl Write,
    value: fn(&Subject, i64, f64) -> f64,
) -> std::io::Result<()> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut noise = 0.0;
    let mut rel = 0;
    while rel < span {
        noise = 0.95 * noise + 0.03 * normal.sample(r);
        if !s.is_off(rel) {
            writeln!(out, "{},{},{:.3}", s.id, start + rel, value(s, rel, noise))?;
        }
        rel += VITALS_PERIOD_MS;
    }
    Ok(())
}
