//! Independent reference implementations used as test oracles.
//!
//! Everything here is deliberately naive: order statistics by counting,
//! drawdowns by enumerating peak/trough pairs, mixed-model quantities by dense
//! matrix inversion. None of it shares code with `fatigue-core`.

pub mod mixed;
pub mod split;
pub mod stats;
