//! The degree-preserving edge swap used by the build-down walk.
//!
//! A swap removes `{x1, x2}` and `{x3, x4}` and adds `{x1, x3}` and
//! `{x2, x4}`. Vertex selection:
//!
//! 1. `x1` uniform over all vertices;
//! 2. `x2` uniform over the neighbours of `x1`;
//! 3. `x3` uniform over the vertices adjacent to neither `x1` nor `x2`;
//! 4. `x4` uniform over the neighbours of `x3` other than `x2`.
//!
//! Each step draws from the explicitly enumerated eligible set, so an empty
//! set is reported as [`SwapRejection::NoCandidates`] rather than retried.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;

/// Four vertices chosen for one swap attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapProposal {
    pub x1: usize,
    pub x2: usize,
    pub x3: usize,
    pub x4: usize,
}

impl SwapProposal {
    /// Checks the selection rules against `g`.
    pub fn is_valid_for(&self, g: &Graph) -> bool {
        let Self { x1, x2, x3, x4 } = *self;
        let n = g.n();
        if [x1, x2, x3, x4].iter().any(|&v| v >= n) {
            return false;
        }
        g.has_edge(x1, x2)
            && x3 != x1
            && x3 != x2
            && !g.has_edge(x3, x1)
            && !g.has_edge(x3, x2)
            && x4 != x2
            && g.has_edge(x3, x4)
    }
}

/// Why a proposal or swap was aborted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SwapRejection {
    #[error("no eligible candidate vertex")]
    NoCandidates,
    #[error("proposal names a vertex outside the graph")]
    InvalidVertex,
    #[error("swap would create a self-loop")]
    SelfLoop,
    #[error("swap would create an edge that already exists")]
    DuplicateEdge,
    #[error("swap breaks k-regularity")]
    Degree,
    #[error("swap disconnects the graph")]
    Disconnected,
}

fn pick<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> Result<usize, SwapRejection> {
    if candidates.is_empty() {
        return Err(SwapRejection::NoCandidates);
    }
    Ok(candidates[rng.random_range(0..candidates.len())])
}

/// Draws a proposal using only `rng`.
pub fn propose_swap<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<SwapProposal, SwapRejection> {
    let n = g.n();
    let x1 = rng.random_range(0..n);
    let x2 = pick(g.neighbors(x1), rng)?;
    let eligible: Vec<usize> =
        (0..n).filter(|&v| v != x1 && v != x2 && !g.has_edge(v, x1) && !g.has_edge(v, x2)).collect();
    let x3 = pick(&eligible, rng)?;
    let eligible: Vec<usize> = g.neighbors(x3).iter().copied().filter(|&v| v != x2).collect();
    let x4 = pick(&eligible, rng)?;
    Ok(SwapProposal { x1, x2, x3, x4 })
}

/// Applies a proposal to a copy of `g`.
///
/// Edges `{x1,x2}` and `{x3,x4}` are deleted where present. The new edges must
/// not be loops and must not already exist; the result must then be k-regular
/// and connected. The input is never modified.
pub fn apply_swap(g: &Graph, p: &SwapProposal) -> Result<Graph, SwapRejection> {
    let SwapProposal { x1, x2, x3, x4 } = *p;
    if [x1, x2, x3, x4].iter().any(|&v| v >= g.n()) {
        return Err(SwapRejection::InvalidVertex);
    }
    if x1 == x3 || x2 == x4 {
        return Err(SwapRejection::SelfLoop);
    }
    let mut out = g.clone();
    for (a, b) in [(x1, x2), (x3, x4)] {
        if a != b && out.has_edge(a, b) {
            out.remove_edge(a, b);
        }
    }
    for (a, b) in [(x1, x3), (x2, x4)] {
        if out.has_edge(a, b) {
            return Err(SwapRejection::DuplicateEdge);
        }
        out.insert_edge_sorted(a, b);
    }
    if !out.degree_check() {
        return Err(SwapRejection::Degree);
    }
    if !out.is_connected() {
        return Err(SwapRejection::Disconnected);
    }
    Ok(out)
}
