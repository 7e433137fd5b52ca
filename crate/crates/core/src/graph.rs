//! Simple undirected graphs with a declared uniform degree.
//!
//! Adjacency is kept twice: sorted per-vertex neighbour lists for iteration
//! and a dense bit table for constant-time adjacency tests.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Structural problems found while building a [`Graph`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} has degree {degree}, expected {k}")]
    NotRegular { vertex: usize, degree: usize, k: usize },
    #[error("graph is disconnected")]
    Disconnected,
}

/// An undirected simple graph on vertices `0..n` tagged with its intended
/// uniform degree `k`.
///
/// Construction enforces simplicity (no loops, no parallel edges) but not
/// regularity, so that non-regular inputs can be represented and rejected by
/// [`Graph::degree_check`].
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    k: usize,
    neighbors: Vec<Vec<usize>>,
    words: usize,
    bits: Vec<u64>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.k == other.k && self.neighbors == other.neighbors
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, k: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut g = Self::empty(n, k);
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if g.has_edge(u, v) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            g.insert_edge(u, v);
        }
        for list in &mut g.neighbors {
            list.sort_unstable();
        }
        Ok(g)
    }

    /// Like [`Graph::from_edges`], additionally requiring k-regularity and
    /// connectivity.
    pub fn regular_from_edges<I>(n: usize, k: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let g = Self::from_edges(n, k, edges)?;
        if let Some(vertex) = (0..n).find(|&v| g.degree(v) != k) {
            return Err(GraphError::NotRegular { vertex, degree: g.degree(vertex), k });
        }
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub(crate) fn empty(n: usize, k: usize) -> Self {
        let words = n.div_ceil(64);
        Self { n, k, neighbors: vec![Vec::with_capacity(k); n], words, bits: vec![0; words * n] }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Sorted neighbours of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// True iff every vertex has degree exactly `k`.
    pub fn degree_check(&self) -> bool {
        self.neighbors.iter().all(|list| list.len() == self.k)
    }

    /// True iff a breadth-first search from vertex 0 reaches every vertex.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::with_capacity(self.n);
        seen[0] = true;
        queue.push_back(0);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n
    }

    /// Breadth-first distances from `source`; unreachable vertices get
    /// `usize::MAX`.
    pub fn bfs_distances(&self, source: usize, dist: &mut [usize], queue: &mut VecDeque<usize>) {
        dist.fill(usize::MAX);
        queue.clear();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u] + 1;
            for &v in &self.neighbors[u] {
                if dist[v] == usize::MAX {
                    dist[v] = du;
                    queue.push_back(v);
                }
            }
        }
    }

    /// Returns the graph with vertex `v` renamed to `perm[v]`.
    ///
    /// # Panics
    /// If `perm` is not a permutation of `0..n`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n, "permutation length must equal n");
        Graph::from_edges(self.n, self.k, self.edges().map(|(u, v)| (perm[u], perm[v])))
            .expect("relabeling by a permutation preserves simplicity")
    }

    /// Number of edges among the neighbours of `v`.
    pub fn local_triangles(&self, v: usize) -> usize {
        let nb = &self.neighbors[v];
        let mut t = 0;
        for (i, &a) in nb.iter().enumerate() {
            t += nb[i + 1..].iter().filter(|&&b| self.has_edge(a, b)).count();
        }
        t
    }

    pub(crate) fn insert_edge(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
        self.neighbors[u].push(v);
        self.neighbors[v].push(u);
    }

    /// Inserts keeping neighbour lists sorted.
    pub(crate) fn insert_edge_sorted(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.neighbors[a];
            let at = list.partition_point(|&x| x < b);
            list.insert(at, b);
        }
    }

    pub(crate) fn remove_edge(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] &= !(1 << (v % 64));
        self.bits[v * self.words + u / 64] &= !(1 << (u % 64));
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.neighbors[a];
            if let Ok(at) = list.binary_search(&b) {
                list.remove(at);
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Graph;
    use alloc::vec::Vec;

    pub fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::from_edges(n, n - 1, edges).unwrap()
    }

    /// Circulant graph on `n` vertices joining `v` to `v ± j` for each jump.
    pub fn circulant(n: usize, jumps: &[usize]) -> Graph {
        let mut edges = Vec::new();
        for v in 0..n {
            for &j in jumps {
                let w = (v + j) % n;
                edges.push((v.min(w), v.max(w)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Graph::from_edges(n, 2 * jumps.len(), edges).unwrap()
    }
}
