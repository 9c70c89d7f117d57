//! Neutral word-rank evolution toolkit.
//!
//! The crate simulates a Wright-Fisher-style Markov chain over word
//! frequencies (Zipf-initialized multinomial resampling of an exponentially
//! growing corpus), measures rank dynamics (rank-change sums and variances,
//! rank-biased overlap, top-y turnover), predicts rank-swap potential from
//! binomial count envelopes, calibrates the model parameters from yearly
//! unigram data, and ingests raw unigram count files into analysis-ready
//! frequency matrices.
//!
//! Everything is deterministic given an explicit seed: simulation replicate
//! `r` draws from its own random stream derived from `(seed, r)`, so results
//! do not depend on execution order or thread count.

pub mod calibration;
pub mod distributions;
mod error;
pub mod grid;
pub mod ingest;
pub mod metrics;
pub mod overlap;
pub mod wf;

pub use error::{Error, Result};
