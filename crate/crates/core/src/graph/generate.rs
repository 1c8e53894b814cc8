//! Seeded generators and a few fixed families.

use super::{Graph, GraphError, TwoColoring};
use crate::rng::{derive, rng_from, tag};
use rand::seq::index::sample;
use rand::Rng;

/// Erdős–Rényi `G(n, p)`: each pair independently present with probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadProbability(p));
    }
    let mut rng = rng_from(seed);
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                g.add_edge_unchecked(u, v);
            }
        }
    }
    Ok(g)
}

/// Uniformly random red/blue coloring of `K_m` (red graph is `G(m, 1/2)`).
pub fn random_coloring(m: usize, seed: u64) -> TwoColoring {
    TwoColoring::from_red(random_graph(m, 0.5, derive(seed, tag("coloring"), 0)).unwrap())
}

/// Random bipartite graph: side one is `0..n1`, side two `n1..n1+n2`.
pub fn random_bipartite(n1: usize, n2: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadProbability(p));
    }
    let mut rng = rng_from(seed);
    let mut g = Graph::empty(n1 + n2);
    for u in 0..n1 {
        for v in n1..n1 + n2 {
            if rng.gen::<f64>() < p {
                g.add_edge_unchecked(u, v);
            }
        }
    }
    Ok(g)
}

/// Back-edge model: vertex `v` joins `min(v, d)` distinct uniform earlier vertices.
/// Reversing the insertion order is a peeling order, so the result is `d`-degenerate.
pub fn random_degenerate(n: usize, d: usize, seed: u64) -> Graph {
    let mut rng = rng_from(seed);
    let mut g = Graph::empty(n);
    for v in 1..n {
        for u in sample(&mut rng, v, d.min(v)).into_iter() {
            g.add_edge_unchecked(u, v);
        }
    }
    g
}

/// Bipartite variant of the back-edge model: each vertex picks a side uniformly and
/// joins up to `d` distinct uniform earlier vertices of the opposite side.
pub fn random_degenerate_bipartite(n: usize, d: usize, seed: u64) -> Graph {
    let mut rng = rng_from(seed);
    let mut g = Graph::empty(n);
    let mut sides: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for v in 0..n {
        let side = if v < 2 { v } else { rng.gen_range(0..2) };
        let other = &sides[1 - side];
        for i in sample(&mut rng, other.len(), d.min(other.len())).into_iter() {
            g.add_edge_unchecked(other[i], v);
        }
        sides[side].push(v);
    }
    g
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    if n >= 3 {
        edges.push((n - 1, 0));
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// `K_{1,leaves}` with center 0.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
    Graph::from_edges(leaves + 1, &edges).unwrap()
}

/// `K_{a,b}` with sides `0..a` and `a..a+b`.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let mut g = Graph::empty(a + b);
    for u in 0..a {
        for v in a..a + b {
            g.add_edge_unchecked(u, v);
        }
    }
    g
}

/// The `dim`-dimensional hypercube `Q_dim`.
pub fn hypercube(dim: u32) -> Graph {
    let n = 1usize << dim;
    let mut g = Graph::empty(n);
    for v in 0..n {
        for b in 0..dim {
            let u = v ^ (1 << b);
            if u > v {
                g.add_edge_unchecked(v, u);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bipartition, degeneracy};

    #[test]
    fn extreme_probabilities() {
        assert_eq!(random_graph(10, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(random_graph(10, 1.0, 1).unwrap().edge_count(), 45);
        assert!(random_graph(10, 1.5, 1).is_err());
    }

    #[test]
    fn generators_are_seed_deterministic() {
        assert_eq!(random_graph(40, 0.5, 3).unwrap(), random_graph(40, 0.5, 3).unwrap());
        assert_ne!(random_graph(40, 0.5, 3).unwrap(), random_graph(40, 0.5, 4).unwrap());
        assert_eq!(random_degenerate(50, 3, 8), random_degenerate(50, 3, 8));
        assert_eq!(random_coloring(30, 2), random_coloring(30, 2));
    }

    #[test]
    fn degenerate_generator_bound() {
        for seed in 0..20 {
            assert!(degeneracy(&random_degenerate(100, 2, seed)).d <= 2);
            let b = random_degenerate_bipartite(60, 2, seed);
            assert!(degeneracy(&b).d <= 2);
            assert!(bipartition(&b).is_some());
        }
    }

    #[test]
    fn families() {
        assert_eq!(hypercube(3).edge_count(), 12);
        assert_eq!(complete_bipartite(2, 3).edge_count(), 6);
        assert_eq!(cycle(5).edge_count(), 5);
        assert_eq!(path(8).edge_count(), 7);
    }
}
