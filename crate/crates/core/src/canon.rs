//! Canonical labeling and isomorphism-class deduplication.
//!
//! Labeling uses ordered-partition refinement: vertices start coloured by a
//! label-free invariant, colours are refined by the multiset of neighbour
//! colours until stable, and the search tree individualises each vertex of
//! the first smallest non-singleton cell in turn. Every leaf is a discrete
//! partition, hence a relabeling; the canonical form is the relabeled edge
//! list that is lexicographically smallest over the tree. Leaves with equal
//! edge lists expose automorphisms, which prune children lying in an already
//! explored orbit of the pointwise stabiliser of the current prefix.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::graph6;

/// Label-independent identity of an isomorphism class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    n: u16,
    edges: Vec<(u16, u16)>,
    digest: u64,
}

impl CanonicalForm {
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Sorted edge list under the canonical vertex order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    /// 64-bit hash of the canonical edge list.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// The canonically labeled graph.
    pub fn to_graph(&self, k: usize) -> Graph {
        Graph::from_edges(self.n(), k, self.edges()).expect("canonical edge list is simple")
    }

    /// graph6 string of the canonically labeled graph.
    pub fn graph6(&self) -> Option<String> {
        graph6::encode(&self.to_graph(0))
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv(acc: u64, word: u64) -> u64 {
    word.to_le_bytes().iter().fold(acc, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Refines an ordered colouring to the coarsest equitable refinement.
///
/// Colours are cell start positions, so a discrete colouring is itself a
/// permutation of `0..n`.
fn refine(g: &Graph, colors: &mut [usize]) {
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    let mut sigs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cells = distinct(colors);
    loop {
        for v in 0..n {
            let sig = &mut sigs[v];
            sig.clear();
            sig.extend(g.neighbors(v).iter().map(|&u| colors[u]));
            sig.sort_unstable();
        }
        order.sort_unstable_by(|&a, &b| colors[a].cmp(&colors[b]).then_with(|| sigs[a].cmp(&sigs[b])));
        let mut next = vec![0; n];
        let mut start = 0;
        for i in 1..=n {
            if i == n
                || colors[order[i]] != colors[order[i - 1]]
                || sigs[order[i]] != sigs[order[i - 1]]
            {
                for &v in &order[start..i] {
                    next[v] = start;
                }
                start = i;
            }
        }
        colors.copy_from_slice(&next);
        let now = distinct(colors);
        if now == cells {
            return;
        }
        cells = now;
    }
}

fn distinct(colors: &[usize]) -> usize {
    let mut seen = vec![false; colors.len()];
    colors.iter().filter(|&&c| !core::mem::replace(&mut seen[c], true)).count()
}

fn initial_colors(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let key = |v: usize| (g.degree(v), g.local_triangles(v));
    let keys: Vec<_> = (0..n).map(key).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&v| keys[v]);
    let mut colors = vec![0; n];
    let mut start = 0;
    for i in 0..n {
        if i > 0 && keys[order[i]] != keys[order[i - 1]] {
            start = i;
        }
        colors[order[i]] = start;
    }
    colors
}

struct Leaf {
    cert: Vec<(u16, u16)>,
    /// `label[v]` is the canonical position of vertex `v`.
    label: Vec<usize>,
    /// Inverse of `label`.
    at: Vec<usize>,
}

struct Search<'a> {
    g: &'a Graph,
    first: Option<Leaf>,
    best: Option<Leaf>,
    generators: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn run(&mut self, mut colors: Vec<usize>, prefix: &mut Vec<usize>) {
        refine(self.g, &mut colors);
        let n = self.g.n();
        let mut size = vec![0usize; n];
        for &c in &colors {
            size[c] += 1;
        }
        let target = (0..n).filter(|&c| size[c] > 1).min_by_key(|&c| (size[c], c));
        let Some(target) = target else {
            self.leaf(colors);
            return;
        };
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() {
                let orbit = self.orbits_fixing(prefix);
                if explored.iter().any(|&u| orbit[u] == orbit[v]) {
                    continue;
                }
            }
            let mut child = colors.clone();
            for &u in &cell {
                if u != v {
                    child[u] = target + 1;
                }
            }
            prefix.push(v);
            self.run(child, prefix);
            prefix.pop();
            explored.push(v);
        }
    }

    /// Orbit representatives under the known automorphisms that fix every
    /// vertex of `prefix`.
    fn orbits_fixing(&self, prefix: &[usize]) -> Vec<usize> {
        let n = self.g.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for gen in &self.generators {
            if prefix.iter().any(|&p| gen[p] != p) {
                continue;
            }
            for v in 0..n {
                let (a, b) = (find(&mut parent, v), find(&mut parent, gen[v]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        (0..n).map(|v| find(&mut parent, v)).collect()
    }

    fn leaf(&mut self, label: Vec<usize>) {
        let mut cert: Vec<(u16, u16)> = self
            .g
            .edges()
            .map(|(u, v)| {
                let (a, b) = (label[u] as u16, label[v] as u16);
                (a.min(b), a.max(b))
            })
            .collect();
        cert.sort_unstable();
        let mut at = vec![0; label.len()];
        for (v, &l) in label.iter().enumerate() {
            at[l] = v;
        }
        let leaf = Leaf { cert, label, at };

        let Some(first) = &self.first else {
            self.best = Some(Leaf { cert: leaf.cert.clone(), label: leaf.label.clone(), at: leaf.at.clone() });
            self.first = Some(leaf);
            return;
        };
        if leaf.cert == first.cert {
            self.record_automorphism(&leaf, true);
            return;
        }
        let best = self.best.as_ref().expect("set with first");
        match leaf.cert.cmp(&best.cert) {
            core::cmp::Ordering::Equal => self.record_automorphism(&leaf, false),
            core::cmp::Ordering::Less => self.best = Some(leaf),
            core::cmp::Ordering::Greater => {}
        }
    }

    fn record_automorphism(&mut self, leaf: &Leaf, with_first: bool) {
        let other = if with_first { self.first.as_ref() } else { self.best.as_ref() }.expect("reference leaf");
        let gamma: Vec<usize> = leaf.label.iter().map(|&l| other.at[l]).collect();
        if gamma.iter().enumerate().any(|(v, &w)| v != w) {
            self.generators.push(gamma);
        }
    }
}

/// Canonical relabeling `perm` such that `g.relabel(&perm)` is the canonical
/// graph.
pub fn canonical_labeling(g: &Graph) -> Vec<usize> {
    let mut search = Search { g, first: None, best: None, generators: Vec::new() };
    search.run(initial_colors(g), &mut Vec::new());
    search.best.expect("search reaches at least one leaf").label
}

/// Canonical form of `g`: equal for two graphs iff they are isomorphic.
pub fn canonical_form(g: &Graph) -> CanonicalForm {
    assert!(g.n() <= u16::MAX as usize, "canonical forms support at most 65535 vertices");
    let mut search = Search { g, first: None, best: None, generators: Vec::new() };
    search.run(initial_colors(g), &mut Vec::new());
    let edges = search.best.expect("search reaches at least one leaf").cert;
    let digest =
        edges.iter().fold(fnv(FNV_OFFSET, g.n() as u64), |h, &(u, v)| fnv(h, (u as u64) << 16 | v as u64));
    CanonicalForm { n: g.n() as u16, edges, digest }
}

/// Cheap isomorphism invariant: per-vertex (triangle count, distance
/// profile) signatures, sorted and hashed. Different fingerprints imply
/// non-isomorphic graphs.
pub fn fingerprint(g: &Graph) -> u64 {
    let n = g.n();
    let mut dist = vec![0; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut sigs: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            g.bfs_distances(v, &mut dist, &mut queue);
            let mut sig = vec![g.degree(v), g.local_triangles(v)];
            for &d in &dist {
                let d = if d == usize::MAX { 0 } else { d };
                if sig.len() < d + 3 {
                    sig.resize(d + 3, 0);
                }
                sig[d + 2] += 1;
            }
            sig
        })
        .collect();
    sigs.sort_unstable();
    let mut h = fnv(fnv(FNV_OFFSET, n as u64), g.edge_count() as u64);
    for sig in &sigs {
        h = fnv(h, sig.len() as u64);
        for &x in sig {
            h = fnv(h, x as u64);
        }
    }
    h
}

#[derive(Debug, Clone)]
enum Slot {
    /// Sole member of its fingerprint bucket so far; labeled lazily.
    Pending(Graph),
    Canon(CanonicalForm),
}

impl Slot {
    fn form(&mut self) -> &CanonicalForm {
        if let Slot::Pending(g) = self {
            *self = Slot::Canon(canonical_form(g));
        }
        match self {
            Slot::Canon(f) => f,
            Slot::Pending(_) => unreachable!(),
        }
    }
}

/// Set of isomorphism classes keyed by [`fingerprint`].
///
/// Canonical labeling only runs when two graphs share a fingerprint.
#[derive(Debug, Clone, Default)]
pub struct DedupIndex {
    buckets: BTreeMap<u64, Vec<Slot>>,
    classes: usize,
}

impl DedupIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct classes stored.
    pub fn len(&self) -> usize {
        self.classes
    }

    pub fn is_empty(&self) -> bool {
        self.classes == 0
    }

    /// Inserts `g`'s class; returns true iff it was not present.
    pub fn insert(&mut self, g: &Graph) -> bool {
        let bucket = self.buckets.entry(fingerprint(g)).or_default();
        if bucket.is_empty() {
            bucket.push(Slot::Pending(g.clone()));
            self.classes += 1;
            return true;
        }
        let form = canonical_form(g);
        if bucket.iter_mut().any(|slot| *slot.form() == form) {
            return false;
        }
        bucket.push(Slot::Canon(form));
        self.classes += 1;
        true
    }

    /// True iff `g`'s class is stored.
    pub fn contains(&mut self, g: &Graph) -> bool {
        let Some(bucket) = self.buckets.get_mut(&fingerprint(g)) else {
            return false;
        };
        let form = canonical_form(g);
        bucket.iter_mut().any(|slot| *slot.form() == form)
    }

    /// Absorbs every class of `other`.
    pub fn merge(&mut self, other: DedupIndex) {
        for (key, slots) in other.buckets {
            for slot in slots {
                let bucket = self.buckets.entry(key).or_default();
                if bucket.is_empty() {
                    bucket.push(slot);
                    self.classes += 1;
                    continue;
                }
                let mut slot = slot;
                let form = slot.form().clone();
                if !bucket.iter_mut().any(|s| *s.form() == form) {
                    bucket.push(Slot::Canon(form));
                    self.classes += 1;
                }
            }
        }
    }
}
