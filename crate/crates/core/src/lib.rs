//! Generation and curation of libraries of connected k-regular graphs that
//! span the feasible clustering-coefficient range.
//!
//! Two samplers feed the library: a validity-checked edge-swap walk started
//! from the maximally clustered ring of caves ([`walk`]) and a uniform
//! pairing-model sampler ([`pairing`]). Their outputs are binned by average
//! clustering coefficient, deduplicated up to isomorphism ([`canon`]), merged,
//! and each bin is subsampled towards a normally distributed mean graph
//! distance ([`library`]).
//!
//! The crate is `no_std` and only needs `alloc`; file formats, checkpointing
//! and the command line live in the `kreglib` crate.

#![no_std]

extern crate alloc;

pub mod canon;
pub mod cave;
pub mod graph;
pub mod graph6;
pub mod library;
pub mod metrics;
pub mod pairing;
pub mod seed;
pub mod stats;
pub mod swap;
pub mod walk;

pub use canon::{canonical_form, CanonicalForm, DedupIndex};
pub use cave::{cave_chain, CaveChainSpec};
pub use graph::{Graph, GraphError};
pub use library::{BinAssigner, Source};
pub use metrics::{clustering_coefficient, max_clustering, mean_graph_distance, GraphMetrics};
pub use swap::{apply_swap, propose_swap, SwapProposal, SwapRejection};
