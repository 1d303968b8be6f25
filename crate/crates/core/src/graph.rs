//! Simple undirected graphs on a fixed vertex set.
//!
//! A graph on `v` vertices is stored as a packed bitset over its
//! `E = v(v-1)/2` canonical pairs `(i, j)`, `i < j`, enumerated in
//! lexicographic order. That order is also the layout of every marginal and
//! covariance vector in the crate.

use std::fmt;

use crate::error::{check_probability, Error, Result};

const WORD_BITS: usize = 64;

/// Number of canonical pairs on `v` vertices.
#[inline]
pub const fn pair_count(v: usize) -> usize {
    v * v.saturating_sub(1) / 2
}

/// Lexicographic slot of the canonical pair `(i, j)`, `i < j < v`.
#[inline]
pub const fn pair_index(i: usize, j: usize, v: usize) -> usize {
    debug_assert!(i < j && j < v);
    i * (2 * v - i - 1) / 2 + (j - i - 1)
}

/// Endpoints of every canonical pair, indexed by slot.
pub fn pair_table(v: usize) -> Vec<(u32, u32)> {
    let mut table = Vec::with_capacity(pair_count(v));
    for i in 0..v {
        for j in (i + 1)..v {
            table.push((i as u32, j as u32));
        }
    }
    table
}

/// Iterates the canonical pairs of `v` vertices in slot order.
pub fn pairs(v: usize) -> impl Iterator<Item = VertexPair> {
    (0..v).flat_map(move |i| ((i + 1)..v).map(move |j| VertexPair { i, j }))
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// An unordered vertex pair, stored with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexPair {
    i: usize,
    j: usize,
}

impl VertexPair {
    /// Canonicalizes `{a, b}`. Self-loops are rejected.
    pub fn new(a: usize, b: usize) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Self { i: a, j: b }),
            std::cmp::Ordering::Greater => Ok(Self { i: b, j: a }),
            std::cmp::Ordering::Equal => Err(Error::InvalidPair { i: a, j: b, v: 0 }),
        }
    }

    /// Canonical pair checked against a vertex count.
    pub fn checked(a: usize, b: usize, v: usize) -> Result<Self> {
        match Self::new(a, b) {
            Ok(p) if p.j < v => Ok(p),
            _ => Err(Error::InvalidPair { i: a, j: b, v }),
        }
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn index(&self, v: usize) -> usize {
        pair_index(self.i, self.j, v)
    }

    /// Inverse of [`VertexPair::index`].
    pub fn from_index(index: usize, v: usize) -> Self {
        assert!(index < pair_count(v), "pair slot {index} out of range for v = {v}");
        let mut i = 0;
        let mut start = 0;
        loop {
            let row = v - i - 1;
            if index < start + row {
                return Self {
                    i,
                    j: i + 1 + (index - start),
                };
            }
            start += row;
            i += 1;
        }
    }
}

impl fmt::Display for VertexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// A simple undirected graph on vertices `0..v`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    v: usize,
    words: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `v >= 2` vertices.
    ///
    /// Panics if `v < 2`; use [`Graph::try_empty`] for unchecked input.
    pub fn empty(v: usize) -> Self {
        Self::try_empty(v).expect("a graph needs at least two vertices")
    }

    pub fn try_empty(v: usize) -> Result<Self> {
        if v < 2 {
            return Err(Error::param(format!("vertex count must be >= 2, got {v}")));
        }
        Ok(Self {
            v,
            words: vec![0; words_for(pair_count(v))],
        })
    }

    pub fn complete(v: usize) -> Self {
        Self::empty(v).complement()
    }

    pub fn from_pairs<I>(v: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::try_empty(v)?;
        for (a, b) in edges {
            let p = VertexPair::checked(a, b, v)?;
            g.insert(p);
        }
        Ok(g)
    }

    /// Graph whose slot `e` is set iff bit `e` of `bits` is set. Needs `E <= 64`.
    pub fn from_bits(v: usize, bits: u64) -> Self {
        let e = pair_count(v);
        assert!(e <= WORD_BITS, "from_bits needs at most 64 pairs");
        let mut g = Self::empty(v);
        let mask = if e == WORD_BITS { u64::MAX } else { (1u64 << e) - 1 };
        g.words[0] = bits & mask;
        g
    }

    /// Slot bitset as a single word. Needs `E <= 64`.
    pub fn to_bits(&self) -> u64 {
        assert!(self.words.len() <= 1, "to_bits needs at most 64 pairs");
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.v
    }

    #[inline]
    pub fn pair_count(&self) -> usize {
        pair_count(self.v)
    }

    /// Packed slot bitset; bits past `E` are always zero.
    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get_index(&self, e: usize) -> bool {
        self.words[e / WORD_BITS] >> (e % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set_index(&mut self, e: usize, present: bool) {
        let bit = 1u64 << (e % WORD_BITS);
        if present {
            self.words[e / WORD_BITS] |= bit;
        } else {
            self.words[e / WORD_BITS] &= !bit;
        }
    }

    #[inline]
    pub fn flip_index(&mut self, e: usize) {
        self.words[e / WORD_BITS] ^= 1u64 << (e % WORD_BITS);
    }

    pub fn contains(&self, p: VertexPair) -> bool {
        self.get_index(p.index(self.v))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        VertexPair::checked(a, b, self.v)
            .map(|p| self.contains(p))
            .unwrap_or(false)
    }

    pub fn insert(&mut self, p: VertexPair) {
        self.set_index(p.index(self.v), true);
    }

    pub fn remove(&mut self, p: VertexPair) {
        self.set_index(p.index(self.v), false);
    }

    /// Slots of present edges, ascending.
    pub fn edge_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * WORD_BITS + tz)
            })
        })
    }

    /// Present edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = VertexPair> + '_ {
        let v = self.v;
        self.edge_indices().map(move |e| VertexPair::from_index(e, v))
    }

    /// `n_e(g)`.
    pub fn edge_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of pairs on which the two graphs disagree.
    pub fn hamming_distance(&self, other: &Graph) -> Result<usize> {
        self.check_same_v(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// The graph `1 - g`.
    pub fn complement(&self) -> Graph {
        let e = self.pair_count();
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let tail = e % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Graph { v: self.v, words }
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.v];
        for p in self.edges() {
            deg[p.i] += 1;
            deg[p.j] += 1;
        }
        deg
    }

    /// Neighbor bitsets, one row of `ceil(v / 64)` words per vertex.
    pub fn neighbor_rows(&self) -> NeighborRows {
        let mut rows = NeighborRows::new(self.v);
        for p in self.edges() {
            rows.toggle(p.i, p.j);
        }
        rows
    }

    /// Unordered vertex triples spanning three edges.
    pub fn triangle_count(&self) -> usize {
        let rows = self.neighbor_rows();
        let closed: usize = self.edges().map(|p| rows.common(p.i, p.j)).sum();
        closed / 3
    }

    /// Paths of length two, one per center and unordered neighbor pair:
    /// `sum_c C(deg(c), 2)`.
    pub fn two_star_count(&self) -> usize {
        self.degrees().iter().map(|&d| d * d.saturating_sub(1) / 2).sum()
    }

    /// Image of the graph under the vertex relabeling `u -> perm[u]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.v {
            return Err(Error::DimensionMismatch {
                expected: self.v,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; self.v];
        for &u in perm {
            if u >= self.v || std::mem::replace(&mut seen[u], true) {
                return Err(Error::param("relabeling is not a permutation"));
            }
        }
        Graph::from_pairs(self.v, self.edges().map(|p| (perm[p.i], perm[p.j])))
    }

    pub(crate) fn check_same_v(&self, other: &Graph) -> Result<()> {
        if self.v != other.v {
            return Err(Error::DimensionMismatch {
                expected: self.v,
                found: other.v,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("v", &self.v)
            .field("edges", &self.edges().map(|p| (p.i, p.j)).collect::<Vec<_>>())
            .finish()
    }
}

/// Per-vertex neighbor bitsets.
#[derive(Clone, Debug)]
pub struct NeighborRows {
    stride: usize,
    bits: Vec<u64>,
}

impl NeighborRows {
    pub fn new(v: usize) -> Self {
        let stride = words_for(v);
        Self {
            stride,
            bits: vec![0; stride * v],
        }
    }

    #[inline]
    fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.stride..(u + 1) * self.stride]
    }

    /// Flips the edge `{a, b}` in both rows.
    #[inline]
    pub fn toggle(&mut self, a: usize, b: usize) {
        self.bits[a * self.stride + b / WORD_BITS] ^= 1u64 << (b % WORD_BITS);
        self.bits[b * self.stride + a / WORD_BITS] ^= 1u64 << (a % WORD_BITS);
    }

    /// `|N(a) ∩ N(b)|`.
    #[inline]
    pub fn common(&self, a: usize, b: usize) -> usize {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum()
    }
}

/// An i.i.d. sample of graphs sharing one vertex count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSample {
    v: usize,
    graphs: Vec<Graph>,
}

impl GraphSample {
    pub fn new(graphs: Vec<Graph>) -> Result<Self> {
        let v = graphs.first().ok_or(Error::EmptySample)?.v;
        if let Some(g) = graphs.iter().find(|g| g.v != v) {
            return Err(Error::DimensionMismatch {
                expected: v,
                found: g.v,
            });
        }
        Ok(Self { v, graphs })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.v
    }

    #[inline]
    pub fn pair_count(&self) -> usize {
        pair_count(self.v)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Graph> {
        self.graphs.iter()
    }

    pub fn into_graphs(self) -> Vec<Graph> {
        self.graphs
    }

    /// Number of member graphs containing each pair, in slot order.
    pub fn edge_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.pair_count()];
        for g in &self.graphs {
            for e in g.edge_indices() {
                counts[e] += 1;
            }
        }
        counts
    }

    /// The mean graph `ḡ`, exact as `count / n`.
    pub fn mean_graph(&self) -> EdgeMarginals {
        let n = self.len() as u64;
        let counts = self.edge_counts().into_iter().map(u64::from).collect();
        EdgeMarginals::from_rational(self.v, counts, n).expect("edge counts never exceed n")
    }

    /// Unbiased sample covariance of the edge-indicator vectors.
    ///
    /// Diagonal entries can exceed 1/4, up to `n / (4 (n - 1))`; the 1/4
    /// bound holds for the population covariance only.
    pub fn edge_covariance(&self) -> Result<EdgeCovariance> {
        let n = self.len();
        if n < 2 {
            return Err(Error::InsufficientSample { needed: 2, found: n });
        }
        let e = self.pair_count();
        let counts = self.edge_counts();
        let mut joint = vec![0u32; e * e];
        let mut present = Vec::with_capacity(e);
        for g in &self.graphs {
            present.clear();
            present.extend(g.edge_indices());
            for &a in &present {
                for &b in &present {
                    joint[a * e + b] += 1;
                }
            }
        }
        let nf = n as f64;
        let entries = joint
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let (a, b) = (idx / e, idx % e);
                let ka = f64::from(counts[a]);
                let kb = f64::from(counts[b]);
                (f64::from(c) - ka * kb / nf) / (nf - 1.0)
            })
            .collect();
        Ok(EdgeCovariance {
            v: self.v,
            entries,
        })
    }

    /// Applies one vertex relabeling to every member.
    pub fn relabel(&self, perm: &[usize]) -> Result<GraphSample> {
        let graphs = self
            .graphs
            .iter()
            .map(|g| g.relabel(perm))
            .collect::<Result<Vec<_>>>()?;
        GraphSample::new(graphs)
    }
}

impl<'a> IntoIterator for &'a GraphSample {
    type Item = &'a Graph;
    type IntoIter = std::slice::Iter<'a, Graph>;

    fn into_iter(self) -> Self::IntoIter {
        self.graphs.iter()
    }
}

/// Exact marginals `num[e] / den`, shared denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMarginals {
    pub num: Vec<u64>,
    pub den: u64,
}

/// Edge probabilities `π_ij` (or empirical frequencies `ḡ_ij`) in slot order.
///
/// When every entry is a known rational with a common denominator the exact
/// form is kept alongside the floats, so W statistics against these marginals
/// can be evaluated in integer arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMarginals {
    v: usize,
    values: Vec<f64>,
    exact: Option<RationalMarginals>,
}

impl EdgeMarginals {
    pub fn new(v: usize, values: Vec<f64>) -> Result<Self> {
        check_len(v, values.len())?;
        for &p in &values {
            check_probability(p)?;
        }
        Ok(Self {
            v,
            values,
            exact: None,
        })
    }

    pub fn from_rational(v: usize, num: Vec<u64>, den: u64) -> Result<Self> {
        check_len(v, num.len())?;
        if den == 0 {
            return Err(Error::param("marginal denominator must be positive"));
        }
        if let Some(&bad) = num.iter().find(|&&k| k > den) {
            return Err(Error::InvalidProbability(bad as f64 / den as f64));
        }
        let values = num.iter().map(|&k| k as f64 / den as f64).collect();
        Ok(Self {
            v,
            values,
            exact: Some(RationalMarginals { num, den }),
        })
    }

    /// `π_ij = p` for every pair. Dyadic `p` (like 0.5) is kept exact.
    pub fn constant(v: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        let e = pair_count(v);
        match dyadic(p) {
            Some((num, den)) => Self::from_rational(v, vec![num; e], den),
            None => Self::new(v, vec![p; e]),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact(&self) -> Option<&RationalMarginals> {
        self.exact.as_ref()
    }

    pub fn get(&self, p: VertexPair) -> f64 {
        self.values[p.index(self.v)]
    }

    /// Mean over pairs.
    pub fn density(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub(crate) fn check_v(&self, v: usize) -> Result<()> {
        if self.v != v {
            return Err(Error::DimensionMismatch {
                expected: v,
                found: self.v,
            });
        }
        Ok(())
    }
}

fn check_len(v: usize, len: usize) -> Result<()> {
    if v < 2 {
        return Err(Error::param(format!("vertex count must be >= 2, got {v}")));
    }
    if len != pair_count(v) {
        return Err(Error::param(format!(
            "expected {} marginal entries for v = {v}, got {len}",
            pair_count(v)
        )));
    }
    Ok(())
}

/// `p = num / 2^k` for the smallest `k <= 32`, if one exists.
fn dyadic(p: f64) -> Option<(u64, u64)> {
    (0..=32).find_map(|shift| {
        let den = 1u64 << shift;
        let scaled = p * den as f64;
        (scaled.fract() == 0.0).then_some((scaled as u64, den))
    })
}

/// Covariance between edge indicators, `E x E` in slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeCovariance {
    v: usize,
    entries: Vec<f64>,
}

impl EdgeCovariance {
    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn dim(&self) -> usize {
        pair_count(self.v)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.dim() + b]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.get(a, a)).collect()
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}
