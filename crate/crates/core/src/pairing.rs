//! Uniform sampling of connected simple k-regular graphs by the pairing
//! (configuration) model with full rejection.
//!
//! Every vertex gets `k` stubs and a uniformly random perfect matching of
//! the stubs is drawn; matchings that produce a loop, a parallel edge or a
//! disconnected graph are thrown away. Each simple labeled k-regular graph
//! arises from exactly `(k!)^n` matchings, so accepted graphs are uniform
//! over labeled connected k-regular graphs.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;
use crate::library::{BinAssigner, SampleEntry, Source};
use crate::metrics::MetricError;
use crate::seed::rng_from_seed;

/// Default number of matchings tried before giving up on one graph.
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PairingError {
    #[error("no simple k-regular graph exists for n = {n}, k = {k}")]
    InvalidParameters { n: usize, k: usize },
    #[error("no connected simple graph after {0} matchings")]
    RetryExhausted(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A uniformly random perfect matching of `0..stubs` (stubs must be even),
/// as consecutive pairs of a shuffled list.
pub fn random_matching<R: Rng + ?Sized>(stubs: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..stubs).collect();
    order.shuffle(rng);
    order.chunks_exact(2).map(|p| (p[0], p[1])).collect()
}

/// One connected simple k-regular graph on `n` vertices.
pub fn uniform_regular<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    max_attempts: usize,
    rng: &mut R,
) -> Result<Graph, PairingError> {
    if n <= k || (n * k) % 2 == 1 {
        return Err(PairingError::InvalidParameters { n, k });
    }
    'attempt: for _ in 0..max_attempts {
        let mut g = Graph::empty(n, k);
        for (a, b) in random_matching(n * k, rng) {
            let (u, v) = (a / k, b / k);
            if u == v || g.has_edge(u, v) {
                continue 'attempt;
            }
            g.insert_edge(u, v);
        }
        if g.is_connected() {
            return Ok(Graph::from_edges(n, k, g.edges()).expect("checked simple"));
        }
    }
    Err(PairingError::RetryExhausted(max_attempts))
}

/// Draws `draws` graphs and deposits each into its clustering bin until the
/// bin holds `per_bin_cap` graphs. Entries are tagged [`Source::Wm`].
pub fn wm_campaign(
    assigner: &BinAssigner,
    draws: usize,
    per_bin_cap: usize,
    max_attempts: usize,
    seed: u64,
) -> Result<Vec<SampleEntry>, PairingError> {
    let (n, k) = (assigner.n(), assigner.k());
    let mut rng = rng_from_seed(seed);
    let mut counts = alloc::vec![0usize; assigner.bin_count()];
    let mut out = Vec::new();
    if per_bin_cap == 0 {
        return Ok(out);
    }
    for _ in 0..draws {
        let g = uniform_regular(n, k, max_attempts, &mut rng)?;
        let entry = SampleEntry::measure(g, Source::Wm, seed)?;
        let bin = assigner.assign(entry.chi).expect("generated graphs respect the clustering bound");
        if counts[bin] < per_bin_cap {
            counts[bin] += 1;
            out.push(entry);
            if counts.iter().all(|&c| c >= per_bin_cap) {
                break;
            }
        }
    }
    Ok(out)
}
