//! Per-graph measurements.
//!
//! Betweenness follows the Brandes convention: sums over ordered
//! source/target pairs with endpoints excluded. Under that convention, for
//! any connected graph on `n` vertices with mean distance `L`,
//!
//! * mean vertex betweenness = `(n - 1)(L - 1)`
//! * mean edge betweenness = `n (n - 1) L / |E|`, i.e. `2 (n - 1) L / k` when
//!   the graph is k-regular.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("clustering coefficient is undefined for k < 2")]
    DegreeBelowTwo,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
}

/// Upper bound `1 - 6 / (k (k + 1))` on the average clustering coefficient
/// of a connected k-regular graph.
pub fn max_clustering(k: usize) -> f64 {
    1.0 - 6.0 / (k * (k + 1)) as f64
}

/// Sum over vertices of the number of edges among each vertex's neighbours.
pub fn triangle_sum(g: &Graph) -> usize {
    (0..g.n()).map(|v| g.local_triangles(v)).sum()
}

/// Average local clustering coefficient of a k-regular graph.
pub fn clustering_coefficient(g: &Graph) -> Result<f64, MetricError> {
    let k = g.k();
    if k < 2 {
        return Err(MetricError::DegreeBelowTwo);
    }
    let pairs = (k * (k - 1) / 2) as f64;
    Ok(triangle_sum(g) as f64 / (pairs * g.n() as f64))
}

/// All-pairs hop distances, row-major `n x n`.
pub fn distance_matrix(g: &Graph) -> Result<Vec<usize>, MetricError> {
    let n = g.n();
    let mut out = vec![0; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        let row = &mut out[s * n..(s + 1) * n];
        g.bfs_distances(s, row, &mut queue);
        if row.contains(&usize::MAX) {
            return Err(MetricError::Disconnected);
        }
    }
    Ok(out)
}

/// Mean shortest-path length over unordered pairs of distinct vertices.
pub fn mean_graph_distance(g: &Graph) -> Result<f64, MetricError> {
    let n = g.n();
    if n < 2 {
        return Ok(0.0);
    }
    let total: usize = distance_matrix(g)?.iter().sum();
    Ok(total as f64 / (n * (n - 1)) as f64)
}

/// Graph-averaged centralities alongside the two headline measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphMetrics {
    pub chi: f64,
    pub mean_distance: f64,
    pub closeness_mean: f64,
    pub vertex_betweenness_mean: f64,
    pub edge_betweenness_mean: f64,
    pub eigenvector_mean: f64,
}

impl GraphMetrics {
    pub fn measure(g: &Graph) -> Result<Self, MetricError> {
        let b = Betweenness::compute(g)?;
        Ok(Self {
            chi: clustering_coefficient(g)?,
            mean_distance: mean_graph_distance(g)?,
            closeness_mean: closeness_mean(g)?,
            vertex_betweenness_mean: b.vertex_mean(),
            edge_betweenness_mean: b.edge_mean(),
            eigenvector_mean: eigenvector_mean(g)?,
        })
    }
}

/// Brandes accumulation over every source.
#[derive(Debug, Clone)]
pub struct Betweenness {
    /// Per-vertex scores.
    pub vertex: Vec<f64>,
    /// Per-edge scores, aligned with `Graph::edges()` order.
    pub edge: Vec<f64>,
}

impl Betweenness {
    pub fn compute(g: &Graph) -> Result<Self, MetricError> {
        let n = g.n();
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let edge_index = |u: usize, v: usize| {
            let key = (u.min(v), u.max(v));
            edges.binary_search(&key).expect("edge present")
        };
        let mut vertex = vec![0.0; n];
        let mut edge = vec![0.0; edges.len()];

        let mut order = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![usize::MAX; n];
        let mut delta = vec![0.0f64; n];
        let mut queue = VecDeque::with_capacity(n);

        for s in 0..n {
            order.clear();
            preds.iter_mut().for_each(Vec::clear);
            sigma.fill(0.0);
            dist.fill(usize::MAX);
            delta.fill(0.0);
            sigma[s] = 1.0;
            dist[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in g.neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            if order.len() != n {
                return Err(MetricError::Disconnected);
            }
            for &w in order.iter().rev() {
                for &v in &preds[w] {
                    let share = sigma[v] / sigma[w] * (1.0 + delta[w]);
                    edge[edge_index(v, w)] += share;
                    delta[v] += share;
                }
                if w != s {
                    vertex[w] += delta[w];
                }
            }
        }
        Ok(Self { vertex, edge })
    }

    pub fn vertex_mean(&self) -> f64 {
        mean(&self.vertex)
    }

    pub fn edge_mean(&self) -> f64 {
        mean(&self.edge)
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn vertex_betweenness_mean(g: &Graph) -> Result<f64, MetricError> {
    Ok(Betweenness::compute(g)?.vertex_mean())
}

pub fn edge_betweenness_mean(g: &Graph) -> Result<f64, MetricError> {
    Ok(Betweenness::compute(g)?.edge_mean())
}

/// Mean over vertices of `(n - 1) / sum_u d(v, u)`.
pub fn closeness_mean(g: &Graph) -> Result<f64, MetricError> {
    let n = g.n();
    let d = distance_matrix(g)?;
    let per_vertex: Vec<f64> = (0..n)
        .map(|v| {
            let total: usize = d[v * n..(v + 1) * n].iter().sum();
            if total == 0 {
                0.0
            } else {
                (n - 1) as f64 / total as f64
            }
        })
        .collect();
    Ok(mean(&per_vertex))
}

const EIGEN_MAX_ITER: usize = 10_000;
const EIGEN_TOL: f64 = 1e-12;

/// Principal eigenvector of the adjacency matrix, normalised to unit sum.
///
/// Iterates with `A + I` so that bipartite graphs (eigenvalue `-k`) do not
/// oscillate.
pub fn eigenvector_centrality(g: &Graph) -> Result<Vec<f64>, MetricError> {
    let n = g.n();
    if !g.is_connected() {
        return Err(MetricError::Disconnected);
    }
    let mut x: Vec<f64> = (0..n).map(|v| 1.0 + v as f64 / n as f64).collect();
    normalise(&mut x);
    let mut next = vec![0.0; n];
    for _ in 0..EIGEN_MAX_ITER {
        for v in 0..n {
            next[v] = x[v] + g.neighbors(v).iter().map(|&u| x[u]).sum::<f64>();
        }
        normalise(&mut next);
        let change = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        core::mem::swap(&mut x, &mut next);
        if change < EIGEN_TOL {
            return Ok(x);
        }
    }
    Err(MetricError::NoConvergence(EIGEN_MAX_ITER))
}

fn normalise(x: &mut [f64]) {
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
}

pub fn eigenvector_mean(g: &Graph) -> Result<f64, MetricError> {
    Ok(mean(&eigenvector_centrality(g)?))
}

/// Which logarithm the population formula uses for its `log x` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    /// Reproduces the known counts; the default.
    #[default]
    Natural,
    /// The base printed alongside the formula; off by many orders of magnitude.
    Ten,
}

/// Base-10 logarithm of the estimated number of non-isomorphic connected
/// 4-regular graphs on `n` vertices: `6.77 + 1.56 n - 8.93 log n`.
pub fn population_estimate_log10(n: usize, base: LogBase) -> f64 {
    let x = n as f64;
    let log = match base {
        LogBase::Natural => libm::log(x),
        LogBase::Ten => libm::log10(x),
    };
    6.77 + 1.56 * x - 8.93 * log
}

/// Estimated number of non-isomorphic connected 4-regular graphs on `n`
/// vertices, natural-log reading.
pub fn population_estimate(n: usize) -> f64 {
    libm::pow(10.0, population_estimate_log10(n, LogBase::Natural))
}

/// Enumerated numbers of connected 4-regular graphs, `(n, count)`
/// (OEIS A006820).
pub const KNOWN_QUARTIC_COUNTS: [(usize, u64); 16] = [
    (5, 1),
    (6, 1),
    (7, 2),
    (8, 6),
    (9, 16),
    (10, 59),
    (11, 265),
    (12, 1_544),
    (13, 10_778),
    (14, 88_168),
    (15, 805_491),
    (16, 8_037_418),
    (17, 86_221_634),
    (18, 985_870_522),
    (19, 11_946_487_647),
    (20, 152_808_063_181),
];

pub fn known_quartic_count(n: usize) -> Option<u64> {
    KNOWN_QUARTIC_COUNTS.iter().find(|&&(m, _)| m == n).map(|&(_, c)| c)
}
