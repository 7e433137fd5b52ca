//! Ring-of-caves construction attaining the maximum clustering coefficient.
//!
//! Each cave is a clique on `k + 1` vertices with one edge `{a_i, b_i}`
//! removed; cave `i` is joined to cave `i + 1 (mod m)` by the edge
//! `a_i - b_{i+1}`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CaveChainError {
    #[error("n = {n} is not a multiple of k + 1 = {}", .k + 1)]
    NotMultiple { n: usize, k: usize },
    #[error("a cave chain needs at least two caves, got {0}")]
    TooFewCaves(usize),
    #[error("degree must be at least 2")]
    DegreeTooSmall,
}

/// Parameters of a cave chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaveChainSpec {
    n: usize,
    k: usize,
}

impl CaveChainSpec {
    pub fn new(n: usize, k: usize) -> Result<Self, CaveChainError> {
        if k < 2 {
            return Err(CaveChainError::DegreeTooSmall);
        }
        if n == 0 || n % (k + 1) != 0 {
            return Err(CaveChainError::NotMultiple { n, k });
        }
        let caves = n / (k + 1);
        if caves < 2 {
            return Err(CaveChainError::TooFewCaves(caves));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn caves(&self) -> usize {
        self.n / (self.k + 1)
    }

    pub fn build(&self) -> Graph {
        let size = self.k + 1;
        let m = self.caves();
        let a = |i: usize| i * size;
        let b = |i: usize| i * size + size - 1;
        let mut edges = Vec::with_capacity(self.n * self.k / 2);
        for i in 0..m {
            let base = i * size;
            for u in base..base + size {
                for v in u + 1..base + size {
                    if (u, v) != (a(i), b(i)) {
                        edges.push((u, v));
                    }
                }
            }
            edges.push((a(i), b((i + 1) % m)));
        }
        Graph::regular_from_edges(self.n, self.k, edges).expect("cave chain is k-regular and connected")
    }
}

/// Shorthand for `CaveChainSpec::new(n, k)?.build()`.
pub fn cave_chain(n: usize, k: usize) -> Result<Graph, CaveChainError> {
    Ok(CaveChainSpec::new(n, k)?.build())
}
