//! Edge-list files, deterministic generators and the weight sort used ahead
//! of the sorted-weighted builder.
//!
//! The text format is ASCII with single spaces and `\n` line ends:
//!
//! ```text
//! <n> <m> weighted|unweighted
//! <u> <v> [<w>]
//! ```
//!
//! `m` counts the edge lines that follow. Weights are written with Rust's
//! shortest round-trip `f64` formatting (`5`, `2.5`).

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Edge;

/// A replayable edge sequence over vertices `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeStream {
    pub n: usize,
    pub weighted: bool,
    pub edges: Vec<Edge>,
    /// Self-loops dropped while reading.
    pub self_loops_dropped: usize,
}

impl EdgeStream {
    pub fn new(n: usize, weighted: bool, edges: Vec<Edge>) -> Self {
        EdgeStream { n, weighted, edges, self_loops_dropped: 0 }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    /// The first `len` edges as a stream over the same vertex set.
    pub fn prefix(&self, len: usize) -> EdgeStream {
        EdgeStream {
            n: self.n,
            weighted: self.weighted,
            edges: self.edges[..len.min(self.edges.len())].to_vec(),
            self_loops_dropped: 0,
        }
    }

    /// Distinct vertex pairs, each with its lightest weight, sorted by endpoints.
    pub fn distinct_edges(&self) -> Vec<Edge> {
        let mut edges: Vec<Edge> = self.edges.iter().map(Edge::normalized).collect();
        edges.sort_by(|a, b| a.key().cmp(&b.key()).then(a.w.total_cmp(&b.w)));
        edges.dedup_by_key(|e| e.key());
        edges
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads an edge-list file. Self-loops are dropped and counted; any other
/// malformed line is an error carrying its 1-based line number.
pub fn read_edge_stream<R: BufRead>(reader: R) -> Result<EdgeStream> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (hline, header) = match lines.next() {
        Some((i, l)) => (i, l?),
        None => return Err(parse_err(1, "missing header")),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, m, kind] = fields[..] else {
        return Err(parse_err(hline, "header must be `n m weighted|unweighted`"));
    };
    let n: usize = n.parse().map_err(|_| parse_err(hline, format!("bad vertex count `{n}`")))?;
    let m: usize = m.parse().map_err(|_| parse_err(hline, format!("bad edge count `{m}`")))?;
    let weighted = match kind {
        "weighted" => true,
        "unweighted" => false,
        other => return Err(parse_err(hline, format!("unknown graph kind `{other}`"))),
    };

    let mut stream = EdgeStream::new(n, weighted, Vec::with_capacity(m));
    let mut count = 0;
    for (lineno, line) in lines {
        let line = line?;
        count += 1;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let expected = if weighted { 3 } else { 2 };
        if parts.len() != expected {
            return Err(parse_err(lineno, format!("expected {expected} fields, got {}", parts.len())));
        }
        let vertex = |s: &str| -> Result<u32> {
            let id: u64 = s.parse().map_err(|_| parse_err(lineno, format!("bad vertex `{s}`")))?;
            if id == 0 || id as usize > n {
                return Err(parse_err(lineno, format!("vertex {id} out of range 1..={n}")));
            }
            Ok(id as u32)
        };
        let (u, v) = (vertex(parts[0])?, vertex(parts[1])?);
        let w = if weighted {
            let w: f64 = parts[2].parse().map_err(|_| parse_err(lineno, format!("bad weight `{}`", parts[2])))?;
            if !w.is_finite() || w < 0.0 {
                return Err(parse_err(lineno, format!("weight {w} must be finite and nonnegative")));
            }
            w
        } else {
            1.0
        };
        if u == v {
            stream.self_loops_dropped += 1;
            continue;
        }
        stream.edges.push(Edge::new(u, v, w));
    }
    if count != m {
        return Err(parse_err(hline, format!("header declares {m} edges, found {count}")));
    }
    Ok(stream)
}

/// Writes the header and one line per edge.
pub fn write_edge_stream<W: Write>(mut out: W, stream: &EdgeStream) -> Result<()> {
    let kind = if stream.weighted { "weighted" } else { "unweighted" };
    writeln!(out, "{} {} {}", stream.n, stream.edges.len(), kind)?;
    for e in &stream.edges {
        if stream.weighted {
            writeln!(out, "{} {} {}", e.u, e.v, e.w)?;
        } else {
            writeln!(out, "{} {}", e.u, e.v)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Inclusive integer weight range for generated graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightRange {
    pub lo: u32,
    pub hi: u32,
}

impl std::str::FromStr for WeightRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
        let lo = lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
        let hi = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
        if lo > hi {
            return Err(format!("empty range {lo}:{hi}"));
        }
        Ok(WeightRange { lo, hi })
    }
}

fn finish(n: usize, mut pairs: Vec<(u32, u32)>, weights: Option<WeightRange>, rng: &mut ChaCha8Rng) -> EdgeStream {
    pairs.shuffle(rng);
    let edges = pairs
        .into_iter()
        .map(|(u, v)| {
            let w = weights.map_or(1.0, |r| rng.random_range(r.lo..=r.hi) as f64);
            Edge::new(u, v, w)
        })
        .collect();
    EdgeStream::new(n, weights.is_some(), edges)
}

/// Erdős–Rényi `G(n, p)`: each unordered pair independently with
/// probability `p`, emitted in a seeded random order.
pub fn gen_gnp(n: usize, p: f64, seed: u64, weights: Option<WeightRange>) -> EdgeStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    if p >= 1.0 {
        for u in 1..=n as u32 {
            for v in u + 1..=n as u32 {
                pairs.push((u, v));
            }
        }
    } else if p > 0.0 {
        // geometric skipping over the pairs (u, v), u < v, in row order
        let log_q = (1.0 - p).ln();
        let total = n as u64 * (n as u64).saturating_sub(1) / 2;
        let mut idx: u64 = 0;
        let (mut row, mut row_start) = (1u64, 0u64);
        loop {
            let r: f64 = rng.random();
            let skip = ((1.0 - r).ln() / log_q).floor();
            if !skip.is_finite() || skip >= (total - idx) as f64 {
                break;
            }
            idx += skip as u64;
            while idx >= row_start + (n as u64 - row) {
                row_start += n as u64 - row;
                row += 1;
            }
            let col = row + 1 + (idx - row_start);
            pairs.push((row as u32, col as u32));
            idx += 1;
            if idx >= total {
                break;
            }
        }
    }
    finish(n, pairs, weights, &mut rng)
}

/// Complete graph on `n` vertices in seeded random order.
pub fn gen_complete(n: usize, seed: u64, weights: Option<WeightRange>) -> EdgeStream {
    gen_gnp(n, 1.0, seed, weights)
}

/// `rows × cols` grid, vertex `(r, c)` labelled `r * cols + c + 1`.
pub fn gen_grid(rows: usize, cols: usize, seed: u64, weights: Option<WeightRange>) -> EdgeStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |r: usize, c: usize| (r * cols + c + 1) as u32;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                pairs.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                pairs.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    finish(rows * cols, pairs, weights, &mut rng)
}

/// Stable sort into nondecreasing weight order.
pub fn sort_by_weight(stream: &EdgeStream) -> EdgeStream {
    let mut sorted = stream.clone();
    sorted.edges.sort_by(|a, b| a.w.total_cmp(&b.w));
    sorted
}
