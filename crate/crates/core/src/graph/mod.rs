//! Bitset graphs and vertex sets.
//!
//! A [`Graph`] stores one row of `u64` words per vertex, rows laid out contiguously.
//! Intersecting neighborhoods is a word-wise AND over rows, which is the kernel behind
//! every defect and moment computation in the crate.

mod degeneracy;
mod generate;
mod io;

pub use degeneracy::{bipartition, degeneracy, greedy_color, is_proper_coloring, min_degree_subgraph, Degeneracy};
pub use generate::{
    complete_bipartite, cycle, hypercube, path, random_bipartite, random_coloring, random_degenerate,
    random_degenerate_bipartite, random_graph, star,
};
pub use io::{parse_coloring, parse_edge_list, write_coloring, write_edge_list};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex set over {set} vertices used with a graph on {graph} vertices")]
    UniverseMismatch { set: usize, graph: usize },
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("ordering is not a permutation of the vertices")]
    BadOrdering,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

// ============================================================================
// VertexSet
// ============================================================================

/// A subset of `0..universe` stored as a bitset of the same width as graph rows.
/// Serializes as `{"universe": n, "members": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "SetRepr", try_from = "SetRepr")]
pub struct VertexSet {
    universe: usize,
    bits: Vec<u64>,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        VertexSet { universe, bits: vec![0; words_for(universe)] }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for w in s.bits.iter_mut() {
            *w = u64::MAX;
        }
        s.trim();
        s
    }

    /// Build from a list of members; duplicates are allowed and collapse.
    pub fn from_vertices(universe: usize, vertices: &[usize]) -> Result<Self, GraphError> {
        let mut s = Self::empty(universe);
        for &v in vertices {
            if v >= universe {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: universe });
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub(crate) fn from_words(universe: usize, bits: Vec<u64>) -> Self {
        debug_assert_eq!(bits.len(), words_for(universe));
        let mut s = VertexSet { universe, bits };
        s.trim();
        s
    }

    /// The vertex range `lo..hi`.
    pub fn range(universe: usize, lo: usize, hi: usize) -> Self {
        let mut s = Self::empty(universe);
        for v in lo..hi.min(universe) {
            s.insert(v);
        }
        s
    }

    fn trim(&mut self) {
        let extra = self.bits.len() * 64 - self.universe;
        if extra > 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn insert(&mut self, v: usize) -> bool {
        let (w, b) = (v / 64, 1u64 << (v % 64));
        let fresh = self.bits[w] & b == 0;
        self.bits[w] |= b;
        fresh
    }

    pub fn remove(&mut self, v: usize) -> bool {
        let (w, b) = (v / 64, 1u64 << (v % 64));
        let present = self.bits[w] & b != 0;
        self.bits[w] &= !b;
        present
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && self.bits[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| BitIter { word: w, base: i * 64 })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// The `k`-th smallest member, if any.
    pub fn nth(&self, mut k: usize) -> Option<usize> {
        for (i, &w) in self.bits.iter().enumerate() {
            let c = w.count_ones() as usize;
            if k < c {
                let mut word = w;
                for _ in 0..k {
                    word &= word - 1;
                }
                return Some(i * 64 + word.trailing_zeros() as usize);
            }
            k -= c;
        }
        None
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn subtract(&mut self, other: &VertexSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.subtract(other);
        s
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.bits.iter().zip(&other.bits).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.intersection_len(other) == 0
    }
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    universe: usize,
    members: Vec<usize>,
}

impl From<VertexSet> for SetRepr {
    fn from(s: VertexSet) -> Self {
        SetRepr { universe: s.universe, members: s.to_vec() }
    }
}

impl TryFrom<SetRepr> for VertexSet {
    type Error = GraphError;

    fn try_from(r: SetRepr) -> Result<Self, GraphError> {
        VertexSet::from_vertices(r.universe, &r.members)
    }
}

struct BitIter {
    word: u64,
    base: usize,
}

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let tz = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(self.base + tz)
    }
}

// ============================================================================
// Graph
// ============================================================================

/// Undirected simple graph with contiguous bitset adjacency rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    edge_count: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = words_for(n);
        Graph { n, words, rows: vec![0; n * words], edge_count: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge_unchecked(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.check_vertex(u)?;
            g.check_vertex(v)?;
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !g.add_edge_unchecked(u, v) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
        }
        Ok(g)
    }

    /// Adds `{u, v}`; returns false if it was already present. Caller guarantees `u != v`
    /// and both ids in range.
    pub(crate) fn add_edge_unchecked(&mut self, u: usize, v: usize) -> bool {
        debug_assert!(u != v && u < self.n && v < self.n);
        let w = self.words;
        let (wu, bu) = (v / 64, 1u64 << (v % 64));
        if self.rows[u * w + wu] & bu != 0 {
            return false;
        }
        self.rows[u * w + wu] |= bu;
        self.rows[v * w + u / 64] |= 1u64 << (u % 64);
        self.edge_count += 1;
        true
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    pub fn check_set(&self, s: &VertexSet) -> Result<(), GraphError> {
        if s.universe() == self.n {
            Ok(())
        } else {
            Err(GraphError::UniverseMismatch { set: s.universe(), graph: self.n })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of `u64` words per adjacency row.
    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(v).iter().enumerate().flat_map(|(i, &w)| BitIter { word: w, base: i * 64 })
    }

    pub fn neighbor_set(&self, v: usize) -> VertexSet {
        VertexSet::from_words(self.n, self.row(v).to_vec())
    }

    /// `|N(v) ∩ s|`.
    pub fn degree_into(&self, v: usize, s: &VertexSet) -> usize {
        self.row(v).iter().zip(s.words()).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Edges as `(u, v)` pairs with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            out.extend(self.neighbors(u).filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    /// `e(X, Y)`: ordered pairs `(x, y) ∈ X × Y` with `xy` an edge.
    pub fn edges_between(&self, x: &VertexSet, y: &VertexSet) -> u64 {
        x.iter().map(|v| self.degree_into(v, y) as u64).sum()
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    g.add_edge_unchecked(u, v);
                }
            }
        }
        g
    }

    /// Subgraph induced on `keep`, relabelled to `0..keep.len()` in increasing order.
    pub fn induced(&self, keep: &[usize]) -> Result<Graph, GraphError> {
        let mut g = Graph::empty(keep.len());
        for (i, &u) in keep.iter().enumerate() {
            self.check_vertex(u)?;
            for (j, &v) in keep.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.add_edge_unchecked(i, j);
                }
            }
        }
        Ok(g)
    }

    /// Write `t ∩ ⋂_{q ∈ tuple} N(q)` into `out` and return its size. Dummy entries
    /// (ids `>= n`) are treated as universal vertices and skipped.
    #[inline]
    pub(crate) fn common_into(&self, tuple: &[usize], t: &[u64], out: &mut [u64]) -> usize {
        out.copy_from_slice(t);
        for &q in tuple {
            if q < self.n {
                for (o, r) in out.iter_mut().zip(self.row(q)) {
                    *o &= r;
                }
            }
        }
        out.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `|N(tuple; t)|` with a caller-provided scratch row.
    #[inline]
    pub(crate) fn codegree_scratch(&self, tuple: &[usize], t: &VertexSet, scratch: &mut Vec<u64>) -> usize {
        scratch.resize(self.words, 0);
        self.common_into(tuple, t.words(), scratch)
    }

    /// `|N(tuple; t)|`.
    pub fn codegree(&self, tuple: &[usize], t: &VertexSet) -> usize {
        let mut scratch = Vec::new();
        self.codegree_scratch(tuple, t, &mut scratch)
    }
}

/// `N(q; t)`: members of `t` adjacent to every entry of `q`. The empty tuple returns `t`.
pub fn common_neighbors(g: &Graph, q: &[usize], t: &VertexSet) -> Result<VertexSet, GraphError> {
    g.check_set(t)?;
    for &v in q {
        g.check_vertex(v)?;
    }
    let mut out = vec![0; g.words()];
    g.common_into(q, t.words(), &mut out);
    Ok(VertexSet::from_words(g.n(), out))
}

// ============================================================================
// Two-colorings of complete graphs
// ============================================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }
}

/// A red/blue coloring of the edges of `K_m`, stored as its red graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoColoring {
    red: Graph,
}

impl TwoColoring {
    pub fn from_red(red: Graph) -> Self {
        TwoColoring { red }
    }

    pub fn monochromatic(m: usize, color: Color) -> Self {
        match color {
            Color::Red => TwoColoring { red: Graph::complete(m) },
            Color::Blue => TwoColoring { red: Graph::empty(m) },
        }
    }

    pub fn m(&self) -> usize {
        self.red.n()
    }

    pub fn red(&self) -> &Graph {
        &self.red
    }

    pub fn blue(&self) -> Graph {
        self.red.complement()
    }

    pub fn color_graph(&self, c: Color) -> Graph {
        match c {
            Color::Red => self.red.clone(),
            Color::Blue => self.blue(),
        }
    }

    /// Color of the pair `{u, v}`; `None` when `u == v` or out of range.
    pub fn color_of(&self, u: usize, v: usize) -> Option<Color> {
        if u == v || u >= self.m() || v >= self.m() {
            None
        } else if self.red.has_edge(u, v) {
            Some(Color::Red)
        } else {
            Some(Color::Blue)
        }
    }
}
