//! Automated fatigue assessment from multimodal wearable recordings.
//!
//! The crate covers the full path from raw sensor CSV files to cross-validated
//! model comparisons:
//!
//! * [`ingest`] parses subjects, sample streams and fatigue labels and cuts the
//!   streams into 6-hour segments aligned to the four daily report slots.
//! * [`features`] slices each segment into 5-minute windows, extracts 58 base
//!   features per window (30 HRV, 8 actigraphy, 10 skin temperature,
//!   10 respiration) and summarises every base feature over time with 13
//!   statistics, giving a 754-dimensional vector per segment.
//! * [`forest`] is a CART random-forest regressor with impurity importance.
//! * [`merf`] fits a mixed-effects random forest with per-cluster random
//!   intercepts, clusters being demographic bins.
//! * [`extract`] drives ingest and features over a whole raw bundle.
//! * [`models`] puts every regressor behind one trait and a name registry.
//! * [`eval`] holds k-fold cross-validation, metrics, the ridge baseline and
//!   modality importance.
//! * [`synth`] generates ground-truth synthetic data for all of the above.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod extract;
pub mod features;
pub mod forest;
pub mod ingest;
pub mod merf;
pub mod models;
pub mod rng;
pub mod synth;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use ingest::Modality;
