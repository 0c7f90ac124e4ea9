//! Synthetic data with known ground truth.
//!
//! * [`gen_clustered`]: clustered regression benchmark, `y = f(x) + b_c + ε`.
//! * [`gen_streams`]: raw sensor CSV bundles in the ingest schemas.
//! * [`gen_single_source`]: feature matrices whose label depends on one base
//!   feature only.
//!
//! Every generator is a pure function of its spec. Randomness comes from
//! ChaCha8 streams derived from the spec seed (see [`crate::rng`]).

mod clustered;
mod streams;

pub use clustered::{
    friedman1, gen_clustered, gen_single_source, ClusteredData, ClusteredSpec, ClusteredTruth,
    FixedEffect, N_INFORMATIVE, N_NOISE,
};
pub use streams::{gen_streams, StreamBundle, StreamSpec, DEFAULT_START_MS, VITALS_PERIOD_MS};
