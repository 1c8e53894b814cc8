//! Constructive machinery for embedding degenerate graphs into dense hosts and into
//! one color class of a two-colored complete graph.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: bitset graphs, generators, degeneracy orderings, edge-list I/O.
//! * [`defect`]: the θ-defect of a tuple and its moments over product sets.
//! * [`decompose`]: the degree-peeling layer decomposition of a pattern graph and the
//!   padded forward tuples the embedder consumes.
//! * [`drc`]: dependent random choice in single-set, pair, chain and mutual forms.
//! * [`prune`]: concentration pruning and the random layer partition of host sets.
//! * [`embed`]: the random-greedy embedder, its certificate, the failure-bound
//!   diagnostic, the one-side-bounded bipartite embedder and embedding verification.
//! * [`pipeline`]: end-to-end bipartite and monochromatic embedding, plus a backtracking
//!   containment oracle.
//!
//! Every randomized operation takes an explicit `u64` seed and draws from ChaCha8
//! streams (see [`rng`]). Work that is data-parallel (tuple enumeration, sampling,
//! restart batches) runs on rayon when the `parallel` feature is enabled and falls back
//! to a sequential loop otherwise; both paths produce identical results.

pub mod decompose;
pub mod defect;
pub mod drc;
pub mod embed;
pub mod exec;
pub mod graph;
pub mod pipeline;
pub mod prune;
pub mod real;
pub mod report;
pub mod rng;

pub use exec::Exec;
pub use graph::{Color, Graph, GraphError, TwoColoring, VertexSet};
