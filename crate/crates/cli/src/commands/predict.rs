use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use super::{load_features, load_subjects};
use crate::config::PipelineConfig;
use crate::output::Outputs;
use fatigue_core::models::SavedDocument;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// model.json written by `fit`.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    #[arg(long, value_name = "FILE")]
    features: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    subjects: Option<PathBuf>,
}

pub fn run(cfg: PipelineConfig, args: Args) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let doc = SavedDocument::from_json(&text)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let (_, data) = load_features(&cfg, args.features)?;
    if data.n_features() != doc.n_features {
        bail!(
            "model `{}` expects {} features, table has {}",
            doc.name,
            doc.n_features,
            data.n_features()
        );
    }
    let subjects = load_subjects(&cfg, args.subjects)?;
    let model = doc.into_fitted();
    let yhat = model.predict(&data, subjects.as_ref())?;

    let mut out = Outputs::new(&cfg.out_dir)?;
    let path = out.stage("predictions.csv");
    let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "subject_id,segment_start_ms,score,prediction")?;
    for i in 0..data.len() {
        writeln!(
            w,
            "{},{},{},{}",
            data.subject_ids[i], data.segment_starts[i], data.y[i], yhat[i]
        )?;
    }
    w.flush()?;
    drop(w);
    out.commit()
}
