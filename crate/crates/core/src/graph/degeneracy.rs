//! Degeneracy orderings, greedy coloring and min-degree peeling.

use super::{Graph, GraphError, VertexSet};
use std::collections::VecDeque;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Degeneracy {
    pub d: usize,
    /// Peeling order: each vertex has at most `d` neighbors later in the list.
    pub ordering: Vec<usize>,
}

/// Repeatedly remove a vertex of minimum residual degree.
pub fn degeneracy(h: &Graph) -> Degeneracy {
    let n = h.n();
    let mut deg: Vec<usize> = (0..n).map(|v| h.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    // Bucket queue with lazy deletion; stale entries are skipped on pop.
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for v in (0..n).rev() {
        buckets[deg[v]].push(v);
    }
    let mut removed = vec![false; n];
    let mut ordering = Vec::with_capacity(n);
    let mut d = 0;
    let mut low = 0;
    while ordering.len() < n {
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop().unwrap();
        if removed[v] || deg[v] != low {
            continue;
        }
        removed[v] = true;
        d = d.max(low);
        ordering.push(v);
        for u in h.neighbors(v) {
            if !removed[u] {
                deg[u] -= 1;
                buckets[deg[u]].push(u);
                low = low.min(deg[u]);
            }
        }
    }
    Degeneracy { d, ordering }
}

/// First-fit coloring in reverse peeling order; uses at most `d + 1` colors when
/// `ordering` is a degeneracy ordering of a `d`-degenerate graph.
pub fn greedy_color(h: &Graph, ordering: &[usize]) -> Result<Vec<usize>, GraphError> {
    let n = h.n();
    if ordering.len() != n {
        return Err(GraphError::BadOrdering);
    }
    let mut seen = vec![false; n];
    for &v in ordering {
        if v >= n || seen[v] {
            return Err(GraphError::BadOrdering);
        }
        seen[v] = true;
    }
    let mut color = vec![usize::MAX; n];
    let mut taken = Vec::new();
    for &v in ordering.iter().rev() {
        taken.clear();
        taken.resize(h.degree(v) + 1, false);
        for u in h.neighbors(v) {
            let c = color[u];
            if c < taken.len() {
                taken[c] = true;
            }
        }
        color[v] = taken.iter().position(|&t| !t).unwrap();
    }
    Ok(color)
}

pub fn is_proper_coloring(h: &Graph, coloring: &[usize]) -> bool {
    coloring.len() == h.n() && h.edges().iter().all(|&(u, v)| coloring[u] != coloring[v])
}

/// A proper 2-coloring if `h` is bipartite (BFS, smallest vertex of each component gets 0).
pub fn bipartition(h: &Graph) -> Option<Vec<usize>> {
    let n = h.n();
    let mut side = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        if side[s] != usize::MAX {
            continue;
        }
        side[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for u in h.neighbors(v) {
                if side[u] == usize::MAX {
                    side[u] = 1 - side[v];
                    queue.push_back(u);
                } else if side[u] == side[v] {
                    return None;
                }
            }
        }
    }
    Some(side)
}

/// Delete vertices of current degree `< threshold` until none remain; return survivors.
pub fn min_degree_subgraph(g: &Graph, threshold: f64) -> VertexSet {
    let n = g.n();
    let mut alive = VertexSet::full(n);
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| (deg[v] as f64) < threshold).collect();
    let mut queued = vec![false; n];
    for &v in &queue {
        queued[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        alive.remove(v);
        for u in g.neighbors(v) {
            if alive.contains(u) {
                deg[u] -= 1;
                if !queued[u] && (deg[u] as f64) < threshold {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    alive
}
