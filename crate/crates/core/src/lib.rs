//! Incremental spectral sparsification of weighted undirected graphs.
//!
//! A one-time setup embeds the initial sparsifier with Krylov resistance
//! estimates and a multilevel low-resistance-diameter clustering. Each new
//! edge is then filtered in `O(log N)` against that clustering: it is either
//! inserted, merged into an existing edge between the same clusters, or
//! absorbed by the cluster it falls inside.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod bench;
pub mod cg;
pub mod dense;
pub mod error;
pub mod eval;
pub mod gen;
pub mod graph;
pub mod lrd;
pub mod mtx;
pub mod resistance;
pub mod stats;
pub mod stream;
pub mod unionfind;
pub mod update;

pub use error::{Error, Result};
pub use graph::{Edge, WeightedGraph};
