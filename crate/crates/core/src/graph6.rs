//! graph6 encoding.
//!
//! A size header (one byte `n + 63` for n ≤ 62, otherwise `~` and three
//! six-bit bytes), then the upper triangle of the adjacency matrix
//! in column-major order (`(0,1), (0,2), (1,2), (0,3), ...`), six bits per
//! byte, most significant bit first, each byte offset by 63.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{Graph, GraphError};

/// Largest vertex count with a one-byte size header.
const SHORT_MAX_N: usize = 62;
/// Largest vertex count with the four-byte size header.
pub const GRAPH6_MAX_N: usize = 258_047;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Graph6Error {
    #[error("empty graph6 line")]
    Empty,
    #[error("byte {0:#04x} outside the graph6 range 63..=126")]
    ByteOutOfRange(u8),
    #[error("graph6 eight-byte size header (n > {GRAPH6_MAX_N}) is not supported")]
    TooLarge,
    #[error("size header of {0} is not in canonical form")]
    NonCanonicalSize(usize),
    #[error("expected {expected} data bytes, found {found}")]
    BadLength { expected: usize, found: usize },
    #[error("padding bits are not zero")]
    NonZeroPadding,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn data_len(n: usize) -> usize {
    (n * n.saturating_sub(1) / 2).div_ceil(6)
}

/// Encodes `g`; returns `None` if `g` has more than [`GRAPH6_MAX_N`] vertices.
pub fn encode(g: &Graph) -> Option<String> {
    let n = g.n();
    if n > GRAPH6_MAX_N {
        return None;
    }
    let mut out = String::with_capacity(4 + data_len(n));
    if n <= SHORT_MAX_N {
        out.push((n as u8 + 63) as char);
    } else {
        out.push('~');
        for shift in [12, 6, 0] {
            out.push(((n >> shift & 63) as u8 + 63) as char);
        }
    }
    let mut byte = 0u8;
    let mut filled = 0;
    for v in 1..n {
        for u in 0..v {
            byte = (byte << 1) | g.has_edge(u, v) as u8;
            filled += 1;
            if filled == 6 {
                out.push((byte + 63) as char);
                byte = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push(((byte << (6 - filled)) + 63) as char);
    }
    Some(out)
}

/// Decodes one graph6 line (surrounding whitespace ignored) into a graph
/// tagged with degree `k`. An optional `>>graph6<<` header is accepted.
pub fn decode(line: &str, k: usize) -> Result<Graph, Graph6Error> {
    let line = line.trim();
    let line = line.strip_prefix(">>graph6<<").unwrap_or(line);
    let bytes = line.as_bytes();
    let &head = bytes.first().ok_or(Graph6Error::Empty)?;
    for &b in bytes {
        if !(63..=126).contains(&b) {
            return Err(Graph6Error::ByteOutOfRange(b));
        }
    }
    let (n, rest) = if head != 126 {
        ((head - 63) as usize, &bytes[1..])
    } else {
        if bytes.get(1) == Some(&126) {
            return Err(Graph6Error::TooLarge);
        }
        let size = bytes.get(1..4).ok_or(Graph6Error::BadLength { expected: 3, found: bytes.len() - 1 })?;
        let n = size.iter().fold(0, |acc, &b| acc << 6 | (b - 63) as usize);
        if n <= SHORT_MAX_N {
            return Err(Graph6Error::NonCanonicalSize(n));
        }
        (n, &bytes[4..])
    };
    let expected = data_len(n);
    if rest.len() != expected {
        return Err(Graph6Error::BadLength { expected, found: rest.len() });
    }
    let bit = |i: usize| (rest[i / 6] - 63) >> (5 - i % 6) & 1 == 1;
    let total = n * n.saturating_sub(1) / 2;
    if (total..expected * 6).any(bit) {
        return Err(Graph6Error::NonZeroPadding);
    }
    let mut edges = Vec::new();
    let mut i = 0;
    for v in 1..n {
        for u in 0..v {
            if bit(i) {
                edges.push((u, v));
            }
            i += 1;
        }
    }
    Ok(Graph::from_edges(n, k, edges)?)
}
