//! Coloring of simple k-uniform hypergraphs by the semi-random ("nibble")
//! method.
//!
//! The crate is organized as a pipeline:
//!
//! * [`hypergraph`]: the immutable k-graph type and structural queries.
//! * [`gen`] and [`format`]: seeded instance generators, fixtures and the
//!   text instance format.
//! * [`partition`]: random vertex partitions certified against per-part
//!   degree and covered-pair bounds, plus the refinement into triangle-free
//!   classes.
//! * [`nibble`]: the round-based semi-random coloring engine with invariant
//!   telemetry.
//! * [`finisher`]: Moser–Tardos resampling for the low-degree leftover.
//! * [`probe`]: polynomial concentration statistics, tail probes, classical
//!   tail bounds and an exact chromatic-number oracle.
//! * [`pipeline`] and [`cli`]: end-to-end runs and the command-line front end.

pub mod cli;
pub mod error;
pub mod finisher;
pub mod format;
pub mod gen;
pub mod hypergraph;
pub mod nibble;
pub mod partition;
pub mod pipeline;
pub mod probe;
pub mod rng;

pub use error::{Error, Result};
pub use hypergraph::{Coloring, ColoringReport, CoveredPairReport, Girth, Hypergraph, Induced};
