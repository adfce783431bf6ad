//! Permutation-group algorithms for experiments on growth and Cayley-graph
//! diameters of symmetric and alternating groups.
//!
//! Conventions used throughout the crate:
//!
//! * Points are `0..n` internally; every textual format is 1-indexed.
//! * Permutations act on the right. `p.compose(&q)` (or `&p * &q`) first
//!   applies `p`, then `q`, so `x^(pq) = (x^p)^q`.
//! * `conjugate(h, g) = g h g^-1` and `commutator(g, h) = g^-1 h^-1 g h`, both
//!   as products in that convention.
//! * "log" in any bound means the natural logarithm.
//!
//! Module map:
//!
//! * [`perm`]: permutations, text formats, generating sets, product sets.
//! * [`group`]: orbits, transitivity, block systems, stabilizer chains.
//! * [`walks`]: Cayley/Schreier graphs, BFS diameters, lazy random walks.
//! * [`growth`]: set-growth certificates and the long-orbit prefix.
//! * [`support`]: support amplification/reduction and commutator lemmas.
//! * [`partition`]: partition joins and the transitivity construction.
//! * [`structure`]: structure trees, level kernels, diameter bounds.
//! * [`pipeline`]: the growth-vs-descent driver, the iteration, reports.

pub mod error;
pub mod group;
pub mod growth;
pub mod partition;
pub mod perm;
pub mod pipeline;
pub mod rng;
pub mod structure;
pub mod support;
pub mod walks;

pub use error::{Error, Result};
pub use group::{BlockSystem, GiantClass, OrbitDecomposition, StabilizerChain};
pub use growth::{GrowthCertificate, PrefixResult};
pub use partition::Partition;
pub use perm::{GenSet, Letter, Parity, Permutation, Tracked, Word};
pub use pipeline::{GrowthParams, GrowthReport, IterationReport, Mode};
pub use structure::{DiamBoundExpr, StructureTree};
pub use walks::{MixingReport, SchreierGraph, SearchBudget, WalkConfig};

/// Default element cap for exact set arithmetic and BFS.
pub const DEFAULT_CAP: usize = 10_000_000;
