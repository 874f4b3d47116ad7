//! Rate-distortion guided stochastic Chase decoding over binary memoryless
//! symmetric (BMS) channels.
//!
//! A BMS channel is handled as a binary symmetric channel whose crossover
//! probability is selected by a receiver-known reliability state. Test flip
//! patterns for a bounded-distance decoder are drawn with per-class flip
//! probabilities given by reverse water-filling, and the list size follows
//! the sum rate-distortion function of the parallel Bernoulli sources.
//!
//! Modules:
//!
//! - [`channel`]: state-dependent BSC model, BI-AWGN front end, likelihoods.
//! - [`waterfill`]: reverse water-filling for discrete classes and BI-AWGN.
//! - [`exact`]: exact list-failure probabilities and flip-vector optimizer.
//! - [`bch`]: GF(2^m) arithmetic and a binary BCH bounded-distance decoder.
//! - [`chase`]: pattern generation, Chase decoding and Monte Carlo runs.
//! - [`cli`]: experiment configs, figure presets and CSV/JSON output.

pub mod bch;
pub mod channel;
pub mod chase;
pub mod cli;
mod error;
pub mod exact;
mod quad;
pub mod rng;
pub mod waterfill;

pub use error::{Error, Result};
