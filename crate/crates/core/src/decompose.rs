//! Degree-peeling layer decomposition of a pattern graph.
//!
//! Starting from `U_1 = V(H)`, `U_{i+1}` is the set of vertices with degree at least
//! `4d` inside `H[U_i]`, and `W_i = U_i \ U_{i+1}`. In a `d`-degenerate graph at most
//! half of `U_i` can have degree `4d` there, so the recursion halves and stops after
//! logarithmically many layers. Each `W_i` is refined by a proper coloring into
//! `W_i^{(j)}`.
//!
//! Layers are indexed from 0 in code: `layers[i][j]` is the `(i+1)`-th peeled layer,
//! color `j`. The embedding order treats the `k·r` pairs `(i, j)` as *slots* ordered
//! lexicographically; slot `i·r + j`.

use crate::graph::{is_proper_coloring, Graph, GraphError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("coloring has {got} entries for {n} vertices")]
    ColoringLength { got: usize, n: usize },
    #[error("coloring is not proper")]
    ImproperColoring,
    #[error("peeling at threshold {threshold} kept {kept} of {of} vertices; the graph is not {d}-degenerate")]
    NotDegenerate { d: usize, threshold: usize, kept: usize, of: usize },
    #[error("vertex {vertex} has {needed} forward neighbors but the pad is {d_pad}")]
    PadTooSmall { vertex: usize, needed: usize, d_pad: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredPartition {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    /// Peeling threshold `4·max(d, 1)`.
    pub threshold: usize,
    /// `layers[i][j]`, members ascending.
    pub layers: Vec<Vec<Vec<usize>>>,
    /// `(i, j)` for every vertex.
    pub layer_of: Vec<(usize, usize)>,
    /// `|U_1|, |U_2|, …, |U_{k+1}|`; the last entry is 0.
    pub peel_sizes: Vec<usize>,
}

impl LayeredPartition {
    pub fn slots(&self) -> usize {
        self.k * self.r
    }

    pub fn slot(&self, i: usize, j: usize) -> usize {
        i * self.r + j
    }

    pub fn slot_of(&self, v: usize) -> usize {
        let (i, j) = self.layer_of[v];
        self.slot(i, j)
    }

    pub fn slot_members(&self, slot: usize) -> &[usize] {
        &self.layers[slot / self.r][slot % self.r]
    }

    /// `|W_i|` summed over colors.
    pub fn layer_size(&self, i: usize) -> usize {
        self.layers[i].iter().map(Vec::len).sum()
    }

    /// Violations of the decomposition guarantees for a graph claimed `d`-degenerate:
    /// the layer-count bound, the per-slot size bound `|W_i^{(j)}| ≤ n / 2^i`
    /// (0-based `i`), independence of each color class, at most `4d` neighbors in the
    /// current or later layers, and halving of the peeled sets.
    pub fn check_invariants(&self, h: &Graph, d: usize) -> Vec<String> {
        let mut bad = Vec::new();
        let n = self.n;
        if n > 0 && self.k > 1 && (self.k >= usize::BITS as usize || (1usize << self.k) > n) {
            bad.push(format!("k = {} exceeds log2(n) for n = {n}", self.k));
        }
        for (i, row) in self.layers.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                if (w.len() as f64) > n as f64 / 2f64.powi(i as i32) {
                    bad.push(format!("|W[{i}][{j}]| = {} > n/2^{i}", w.len()));
                }
            }
        }
        for (u, v) in h.edges() {
            if self.layer_of[u].1 == self.layer_of[v].1 {
                bad.push(format!("edge {u}-{v} inside color class {}", self.layer_of[u].1));
            }
        }
        let cap = 4 * d.max(1);
        for v in 0..n {
            let i = self.layer_of[v].0;
            let later = h.neighbors(v).filter(|&u| self.layer_of[u].0 >= i).count();
            if later > cap {
                bad.push(format!("vertex {v} has {later} neighbors in layers >= {i}"));
            }
        }
        for w in self.peel_sizes.windows(2) {
            if 2 * w[1] > w[0] {
                bad.push(format!("peeling kept {} of {}", w[1], w[0]));
            }
        }
        bad
    }
}

/// Peel `h` into layers and refine by `coloring`.
pub fn split(h: &Graph, coloring: &[usize], d: usize) -> Result<LayeredPartition, DecomposeError> {
    let n = h.n();
    if coloring.len() != n {
        return Err(DecomposeError::ColoringLength { got: coloring.len(), n });
    }
    if !is_proper_coloring(h, coloring) {
        return Err(DecomposeError::ImproperColoring);
    }
    let r = coloring.iter().copied().max().map_or(1, |c| c + 1);
    // With d = 0 every degree clears a zero threshold; an edgeless graph is peeled at 4.
    let threshold = 4 * d.max(1);

    let mut current: Vec<usize> = (0..n).collect();
    let mut in_current = crate::graph::VertexSet::full(n);
    let mut peel_sizes = vec![n];
    let mut layers: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut layer_of = vec![(0, 0); n];
    while !current.is_empty() {
        let (next, here): (Vec<usize>, Vec<usize>) =
            current.iter().partition(|&&v| h.degree_into(v, &in_current) >= threshold);
        if 2 * next.len() > current.len() {
            return Err(DecomposeError::NotDegenerate { d, threshold, kept: next.len(), of: current.len() });
        }
        let i = layers.len();
        let mut row = vec![Vec::new(); r];
        for &v in &here {
            row[coloring[v]].push(v);
            layer_of[v] = (i, coloring[v]);
            in_current.remove(v);
        }
        layers.push(row);
        peel_sizes.push(next.len());
        current = next;
    }
    Ok(LayeredPartition { n, k: layers.len(), r, threshold, layers, layer_of, peel_sizes })
}

/// The padding used when none is specified: `4d`, enough for any vertex by the
/// forward-degree bound.
pub fn default_pad(d: usize) -> usize {
    4 * d
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardPlan {
    pub d_pad: usize,
    /// Pattern vertex count; dummy ids are `pattern_n..pattern_n + dummy_count`.
    pub pattern_n: usize,
    pub dummy_count: usize,
    /// `N⁺(x)`: neighbors in lexicographically later slots, ordered by (slot, id).
    pub forward: Vec<Vec<usize>>,
    /// `e_x`: `N⁺(x)` followed by dummies, length `d_pad`. Position `p` of a padded
    /// tuple holds dummy `pattern_n + p`.
    pub tuples: Vec<Vec<usize>>,
}

impl ForwardPlan {
    pub fn is_dummy(&self, v: usize) -> bool {
        v >= self.pattern_n
    }

    pub fn max_forward(&self) -> usize {
        self.forward.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn forward_plan(h: &Graph, partition: &LayeredPartition, d_pad: usize) -> Result<ForwardPlan, DecomposeError> {
    let n = h.n();
    let mut forward = Vec::with_capacity(n);
    let mut tuples = Vec::with_capacity(n);
    for x in 0..n {
        let sx = partition.slot_of(x);
        let mut fw: Vec<usize> = h.neighbors(x).filter(|&u| partition.slot_of(u) > sx).collect();
        fw.sort_by_key(|&u| (partition.slot_of(u), u));
        if fw.len() > d_pad {
            return Err(DecomposeError::PadTooSmall { vertex: x, needed: fw.len(), d_pad });
        }
        let mut e = fw.clone();
        e.extend((fw.len()..d_pad).map(|p| n + p));
        forward.push(fw);
        tuples.push(e);
    }
    Ok(ForwardPlan { d_pad, pattern_n: n, dummy_count: d_pad, forward, tuples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{degeneracy, greedy_color, path, random_degenerate, star};
    use proptest::prelude::*;

    fn colored_split(h: &Graph) -> (LayeredPartition, usize) {
        let dg = degeneracy(h);
        let c = greedy_color(h, &dg.ordering).unwrap();
        (split(h, &c, dg.d).unwrap(), dg.d)
    }

    #[test]
    fn path_has_one_layer() {
        let h = path(8);
        let (p, d) = colored_split(&h);
        assert_eq!((p.k, p.r, d), (1, 2, 1));
        assert_eq!(p.layers[0].iter().map(Vec::len).sum::<usize>(), 8);
        assert!(p.check_invariants(&h, d).is_empty());
    }

    #[test]
    fn star_center_is_peeled_second() {
        let h = star(20);
        let (p, _) = colored_split(&h);
        assert_eq!(p.k, 2);
        assert_eq!(p.peel_sizes, vec![21, 1, 0]);
        assert_eq!(p.layer_of[0].0, 1);
    }

    #[test]
    fn empty_graph_single_layer() {
        let h = Graph::empty(6);
        let p = split(&h, &[0; 6], 0).unwrap();
        assert_eq!((p.k, p.r), (1, 1));
        assert_eq!(p.layers[0][0].len(), 6);
    }

    #[test]
    fn improper_coloring_rejected() {
        let h = path(3);
        assert_eq!(split(&h, &[0, 0, 1], 1), Err(DecomposeError::ImproperColoring));
        assert!(matches!(split(&h, &[0, 1], 1), Err(DecomposeError::ColoringLength { .. })));
    }

    #[test]
    fn wrong_degeneracy_is_detected() {
        let h = Graph::complete(12);
        let c: Vec<usize> = (0..12).collect();
        assert!(matches!(split(&h, &c, 1), Err(DecomposeError::NotDegenerate { .. })));
    }

    #[test]
    fn padding_examples() {
        let h = Graph::from_edges(4, &[(0, 1), (0, 2)]).unwrap();
        // vertex 0 in color 0, others in color 1; 3 isolated in color 0.
        let p = split(&h, &[0, 1, 1, 0], 1).unwrap();
        let f = forward_plan(&h, &p, 4).unwrap();
        assert_eq!(f.tuples[0], vec![1, 2, 6, 7]);
        assert_eq!(f.tuples[3], vec![4, 5, 6, 7]);
        assert!(f.tuples[3].iter().all(|&v| f.is_dummy(v)));
        assert!(matches!(forward_plan(&h, &p, 1), Err(DecomposeError::PadTooSmall { vertex: 0, needed: 2, .. })));
    }

    proptest! {
        #[test]
        fn split_invariants(n in 1usize..300, d in 1usize..5, seed in any::<u64>()) {
            let h = random_degenerate(n, d, seed);
            let (p, dd) = colored_split(&h);
            prop_assert!(p.check_invariants(&h, dd).is_empty(), "{:?}", p.check_invariants(&h, dd));
            let f = forward_plan(&h, &p, default_pad(dd.max(1))).unwrap();
            for x in 0..n {
                prop_assert_eq!(f.tuples[x].len(), f.d_pad);
                for &y in &f.tuples[x] {
                    prop_assert!(f.is_dummy(y) || p.slot_of(y) > p.slot_of(x));
                }
            }
        }
    }
}
