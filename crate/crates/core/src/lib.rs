//! Bounded-degree LRPC codes over `F_{q^m}` with a successive-intersection
//! decoder, analytic decoding-failure probabilities and a Monte Carlo harness.
//!
//! The `parallel` feature (on by default) spreads Monte Carlo trials over a
//! rayon pool; without it every run is sequential. Results are identical
//! either way.

pub mod cli;
pub mod code;
pub mod decoder;
pub mod error;
pub mod field;
pub mod linalg;
pub mod montecarlo;
pub mod probability;
pub mod subspace;

pub use code::{CodeInstance, CodeParams, Requirements, Word};
pub use decoder::{decode, DecodeOutcome, DecoderConfig, FailureStage};
pub use error::{Error, Result};
pub use field::{Elem, Field};
pub use linalg::Matrix;
pub use montecarlo::{estimate_pt, estimate_qt, simulate_decoding, RankParams, SimOptions, TrialStats};
pub use probability::{ProbParams, ProbReport, Prob};
pub use subspace::Subspace;
