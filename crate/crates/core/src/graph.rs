//! Binomial random graphs stored as rows of 64-bit adjacency words.
//!
//! Row `v` holds bit `u` iff the edge `{u, v}` is present. Rows are padded to
//! a whole number of words and the padding bits are always zero, so
//! intersections and popcounts can run word-by-word without masking.

use std::fmt;
use std::io::{BufRead, Write};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Below this edge probability the sampler jumps between present edges with
/// geometrically distributed skips instead of drawing once per pair.
pub const GEOMETRIC_SKIP_BELOW: f64 = 0.05;

/// Which sampling loop produced a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    /// One uniform draw per pair `(u, v)`, `u < v`, in lexicographic order.
    PerPair,
    /// Geometric skips over the same lexicographic pair sequence.
    GeometricSkip,
    /// Built directly from an edge list.
    Explicit,
}

/// Uniform double in `[0, 1)` from the top 53 bits of a 64-bit draw.
#[inline]
fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// A sorted, nonempty set of distinct vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedVertexSet);
        }
        Ok(VertexSet(vertices))
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        Self::new(vertices)
    }

    pub(crate) fn from_sorted_unchecked(vertices: Vec<usize>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        VertexSet(vertices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_vertex(&self) -> usize {
        *self.0.last().expect("vertex sets are nonempty")
    }
}

impl TryFrom<Vec<usize>> for VertexSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        VertexSet::new(v)
    }
}

impl From<VertexSet> for Vec<usize> {
    fn from(s: VertexSet) -> Self {
        s.0
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Immutable simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    p: f64,
    seed: u64,
    method: SamplingMethod,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .field("p", &self.p)
            .field("seed", &self.seed)
            .field("method", &self.method)
            .finish()
    }
}

impl Graph {
    fn empty(n: usize, p: f64, seed: u64, method: SamplingMethod) -> Self {
        let words = words_for(n);
        Graph {
            n,
            words,
            adj: vec![0; n * words],
            p,
            seed,
            method,
        }
    }

    /// Samples `G(n, p)` from a ChaCha8 stream seeded with `seed`.
    ///
    /// For `p >= GEOMETRIC_SKIP_BELOW` every pair `(u, v)` with `u < v`
    /// consumes exactly one 64-bit draw, in lexicographic order, so the graph
    /// is a pure function of `(n, p, seed)`. Sparser graphs use geometric
    /// skipping over the same pair order; those samples are valid but only
    /// the per-pair path is pinned bit-for-bit.
    pub fn sample_gnp(n: usize, p: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p, "[0, 1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = if p < GEOMETRIC_SKIP_BELOW {
            let mut g = Self::empty(n, p, seed, SamplingMethod::GeometricSkip);
            g.fill_geometric(&mut rng);
            g
        } else {
            let mut g = Self::empty(n, p, seed, SamplingMethod::PerPair);
            for u in 0..n {
                for v in (u + 1)..n {
                    if unit_f64(&mut rng) < p {
                        g.set_edge(u, v);
                    }
                }
            }
            g
        };
        g.debug_check();
        Ok(g)
    }

    fn fill_geometric(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.n;
        if self.p <= 0.0 || n < 2 {
            return;
        }
        let log_q = (-self.p).ln_1p();
        // Cursor sits on the last visited pair; `v == u` means "before row u".
        let (mut u, mut v) = (0usize, 0usize);
        loop {
            let r = 1.0 - unit_f64(rng); // (0, 1]
            let skip = (r.ln() / log_q).floor();
            if !(skip.is_finite() && skip < (n * n) as f64) {
                return;
            }
            // Pass over `skip` absent pairs and land on the next one.
            let mut step = skip as usize + 1;
            while step > n - 1 - v {
                step -= n - 1 - v;
                u += 1;
                v = u;
                if u + 1 >= n {
                    return;
                }
            }
            v += step;
            self.set_edge(u, v);
        }
    }

    /// Builds a graph from an explicit edge list. Duplicate edges are merged;
    /// loops and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut g = Self::empty(n, f64::NAN, 0, SamplingMethod::Explicit);
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("loop at vertex {u}")));
            }
            g.set_edge(u, v);
        }
        g.debug_check();
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        Self::from_edges(n, &edges)
    }

    pub fn edgeless(n: usize) -> Result<Self> {
        Self::from_edges(n, &[])
    }

    /// Copy of this graph with `{u, v}` added.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Self> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::InvalidParameter(format!("loop at vertex {u}")));
        }
        let mut g = self.clone();
        g.method = SamplingMethod::Explicit;
        g.set_edge(u, v);
        Ok(g)
    }

    #[inline]
    fn set_edge(&mut self, u: usize, v: usize) {
        let w = self.words;
        self.adj[u * w + v / WORD_BITS] |= 1u64 << (v % WORD_BITS);
        self.adj[v * w + u / WORD_BITS] |= 1u64 << (u % WORD_BITS);
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            let tail = self.n % WORD_BITS;
            for v in 0..self.n {
                debug_assert!(!self.has_edge(v, v), "loop at {v}");
                if tail != 0 {
                    let last = self.row(v)[self.words - 1];
                    debug_assert_eq!(last >> tail, 0, "padding bits set in row {v}");
                }
            }
        }
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edge probability used at sampling; `NaN` for explicitly built graphs.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn method(&self) -> SamplingMethod {
        self.method
    }

    /// Number of 64-bit words per adjacency row.
    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.row(u)[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.degree_unchecked(v))
    }

    #[inline]
    pub(crate) fn degree_unchecked(&self, v: usize) -> usize {
        popcount(self.row(v))
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree_unchecked(v)).collect()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree_unchecked(v)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            let row = self.row(u);
            ((u + 1)..self.n)
                .filter(move |&v| row[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1)
                .map(move |v| (u, v))
        })
    }

    /// `|N(U)|`: vertices outside `U` adjacent to every member of `U`.
    pub fn common_neighbor_count(&self, set: &VertexSet) -> Result<usize> {
        for &v in set.as_slice() {
            self.check_vertex(v)?;
        }
        let mut acc = self.row(set.as_slice()[0]).to_vec();
        for &v in &set.as_slice()[1..] {
            and_assign(&mut acc, self.row(v));
        }
        // Members are never their own neighbors, but clear them regardless.
        for &v in set.as_slice() {
            acc[v / WORD_BITS] &= !(1u64 << (v % WORD_BITS));
        }
        Ok(popcount(&acc))
    }

    /// Writes the edge-list format: `n m`, then one `u v` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.n, self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let parse_pair = |line_no: usize, s: &str| -> Result<(usize, usize)> {
            let mut it = s.split_ascii_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::Parse {
                    line: line_no,
                    reason: "expected two integers".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: line_no,
                    reason: format!("{e}"),
                })
            };
            let a = parse(it.next())?;
            let b = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    reason: "trailing tokens".into(),
                });
            }
            Ok((a, b))
        };
        let (n, m) = match lines.next() {
            Some((_, line)) => parse_pair(1, &line?)?,
            None => {
                return Err(Error::Parse {
                    line: 1,
                    reason: "missing header".into(),
                })
            }
        };
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (u, v) = parse_pair(idx + 1, &line)?;
            if u >= v {
                return Err(Error::Parse {
                    line: idx + 1,
                    reason: format!("expected u < v, got {u} {v}"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: 1,
                reason: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Self::from_edges(n, &edges)
    }
}

#[inline]
pub(crate) fn popcount(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

#[inline]
pub(crate) fn and_assign(acc: &mut [u64], row: &[u64]) {
    for (a, r) in acc.iter_mut().zip(row) {
        *a &= r;
    }
}

/// Writes `a & b` into `out` and returns its popcount.
#[inline]
pub(crate) fn and_into(out: &mut [u64], a: &[u64], b: &[u64]) -> usize {
    let mut count = 0;
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x & y;
        count += o.count_ones() as usize;
    }
    count
}
