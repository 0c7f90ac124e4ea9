use std::path::Path;
use std::process::{Command, Output};

fn fatigue(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fatigue"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("running fatigue")
}

fn ok(args: &[&str]) -> Output {
    let out = fatigue(args);
    assert!(
        out.status.success(),
        "fatigue {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn lines(p: &Path) -> Vec<String> {
    std::fs::read_to_string(p)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

fn entries(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .collect()
        })
        .unwrap_or_default();
    v.sort();
    v
}

#[test]
fn synth_extract_evaluate_fit_predict() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw");
    let out = dir.path().join("out");
    let stdout = ok(&[
        "--seed", "2", "--out-dir", s(&raw), "synth", "streams", "--subjects", "4", "--days", "2",
    ]);
    assert!(String::from_utf8_lossy(&stdout.stdout).contains("labels.csv"));
    assert_eq!(
        entries(&raw),
        ["accel.csv", "labels.csv", "pipeline.toml", "resp.csv", "rr.csv", "subjects.csv", "temp.csv"]
    );

    ok(&["--config", s(&raw.join("pipeline.toml")), "--out-dir", s(&out), "extract"]);
    assert_eq!(
        entries(&out),
        ["extraction_log.json", "feature_meta.json", "features.csv"]
    );
    let features = out.join("features.csv");
    assert_eq!(lines(&features).len(), 1 + 4 * 2 * 4);

    let cfg = dir.path().join("small.toml");
    std::fs::write(
        &cfg,
        "seed = 5\nout_dir = \"out\"\n[input]\ndir = \"raw\"\n[models]\nmax_em_iters = 5\n[models.forest]\nn_trees = 10\n[cv]\nk = 3\n",
    )
    .unwrap();
    let c = s(&cfg);
    ok(&["--config", c, "evaluate", "--models", "linear,rf,merf_age_bmi"]);
    let table = lines(&out.join("table1.csv"));
    assert_eq!(table[0], "model,RMSE,MAE,MAPE,Corr");
    assert_eq!(table.len(), 4);
    let fig = lines(&out.join("fig1.csv"));
    assert_eq!(fig[0], "model,modality,top15_count,score_sum");
    // linear has no importance; rf and MERF give four modality rows each
    assert_eq!(fig.len(), 1 + 2 * 4);
    let counts: usize = fig[1..5]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(counts, 15);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["models"].as_array().unwrap().len(), 3);

    ok(&["--config", c, "fit", "--model", "merf_age_bmi"]);
    ok(&["--config", c, "predict", "--model", s(&out.join("model.json"))]);
    let preds = lines(&out.join("predictions.csv"));
    assert_eq!(preds[0], "subject_id,segment_start_ms,score,prediction");
    assert_eq!(preds.len(), lines(&features).len());
    assert!(preds[1..]
        .iter()
        .all(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().is_finite()));
    assert!(!entries(&out).iter().any(|e| e.starts_with(".staging")));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        ok(&[
            "--seed", "9", "--out-dir", s(d), "synth", "clustered", "--clusters", "4",
            "--per-cluster", "6",
        ]);
    }
    for f in ["synth_features.csv", "synth_truth.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = fatigue(&["synth", "streams", "--days", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--subjects"));
}

#[test]
fn demographic_model_without_subjects_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&[
        "--out-dir", s(d), "synth", "clustered", "--clusters", "4", "--per-cluster", "6",
    ]);
    let before = entries(d);
    let out = fatigue(&[
        "--out-dir",
        s(d),
        "evaluate",
        "--features",
        s(&d.join("synth_features.csv")),
        "--models",
        "rf,merf_age",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("demographics"), "{err}");
    assert_eq!(entries(d), before);
}

#[test]
fn missing_input_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = fatigue(&["--out-dir", s(dir.path()), "extract", "--input", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rr.csv"));
    assert!(entries(dir.path()).is_empty());
}

#[test]
fn unknown_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["--out-dir", s(d), "synth", "clustered", "--clusters", "3", "--per-cluster", "5"]);
    let out = fatigue(&[
        "--out-dir",
        s(d),
        "fit",
        "--model",
        "gbm",
        "--features",
        s(&d.join("synth_features.csv")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("gbm"));
    assert!(!d.join("model.json").exists());
}

#[test]
fn bad_config_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.toml");
    std::fs::write(&cfg, "[cv]\nfolds = 3\n").unwrap();
    let out = fatigue(&["--config", s(&cfg), "synth", "clustered", "--clusters", "3", "--per-cluster", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("folds"));
}
