//! Authorship verification toolkit.
//!
//! The pipeline runs in stages, each backed by one module:
//!
//! * [`corpus`]: manifest ingest, paragraph segmentation, token-length filter and pair truncation.
//! * [`pairgen`]: author grouping, author-disjoint splits and quota-exact pair sampling.
//! * [`features`]: character n-gram tf-idf vocabulary and vectors.
//! * [`impostors`]: the Impostors verifier over minmax similarity.
//! * [`protocol`]: the `verify/1` line protocol for external classifiers.
//! * [`eval`]: confusion matrices, P/R/F1, distance series, Pearson and McNemar.
//! * [`pipeline`]: declarative multi-stage runs with resumable, hashed outputs.
//! * [`synth`]: synthetic Markov-chain corpora for demos and tests.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod impostors;
pub mod pairgen;
pub mod pipeline;
pub mod protocol;
pub mod results;
pub mod seed;
pub mod sparse;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
