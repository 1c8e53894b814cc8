//! Independent oracles shared by the integration suites. Nothing in this file calls
//! into the library's moment, peeling or embedding code; graphs are only read through
//! `has_edge`, `neighbors` and `n`. Input builders that do use the library live in
//! [`corpus`].

#![allow(dead_code)]

pub mod corpus;

use std::collections::BTreeMap;

use rand::Rng as _;
use ramsey_embed::graph::{Graph, VertexSet};
use ramsey_embed::rng::{rng_from, Rng};

/// `|N(q; t)|` by scanning `t` and testing every pair. The empty tuple has `t` itself.
pub fn codegree(g: &Graph, q: &[usize], t: &[usize]) -> usize {
    t.iter().filter(|&&v| q.iter().all(|&x| x != v && g.has_edge(x, v))).count()
}

/// Defect from a codegree: 0 when rich, `θ/c` when poor, infinite when empty.
pub fn defect(theta: f64, c: usize) -> f64 {
    let c = c as f64;
    if c >= theta {
        0.0
    } else if c == 0.0 {
        f64::INFINITY
    } else {
        theta / c
    }
}

/// `ω^s` with the indicator convention at `s = 0`.
pub fn defect_pow(theta: f64, s: u32, c: usize) -> f64 {
    let w = defect(theta, c);
    match (s, w == 0.0) {
        (_, true) => 0.0,
        (0, false) => 1.0,
        _ => w.powi(s as i32),
    }
}

/// Every tuple of the product, in odometer order.
pub fn tuples(factors: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for prefix in &out {
            for &v in f {
                let mut t = prefix.clone();
                t.push(v);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Codegree counts over the whole product.
pub fn histogram(g: &Graph, factors: &[Vec<usize>], t: &[usize]) -> (BTreeMap<usize, u64>, u64) {
    let mut h = BTreeMap::new();
    let mut total = 0;
    for q in tuples(factors) {
        *h.entry(codegree(g, &q, t)).or_insert(0) += 1;
        total += 1;
    }
    (h, total)
}

/// `Σ_Q ω(Q)^s`, accumulated in ascending codegree order.
pub fn power_sum(g: &Graph, theta: f64, s: u32, factors: &[Vec<usize>], t: &[usize]) -> f64 {
    let (h, _) = histogram(g, factors, t);
    h.iter().map(|(&c, &k)| if k == 0 { 0.0 } else { k as f64 * defect_pow(theta, s, c) }).sum()
}

/// The `s`-th moment by full enumeration.
pub fn moment(g: &Graph, theta: f64, s: u32, factors: &[Vec<usize>], t: &[usize]) -> f64 {
    let (h, total) = histogram(g, factors, t);
    let mut sum = 0.0;
    for (&c, &k) in &h {
        if k > 0 {
            sum += k as f64 * defect_pow(theta, s, c);
        }
    }
    sum / total as f64
}

/// `Σ ω^s` over tuples that repeat some vertex.
pub fn repeated_power_sum(g: &Graph, theta: f64, s: u32, factors: &[Vec<usize>], t: &[usize]) -> f64 {
    tuples(factors)
        .into_iter()
        .filter(|q| (0..q.len()).any(|i| (i + 1..q.len()).any(|j| q[i] == q[j])))
        .map(|q| defect_pow(theta, s, codegree(g, &q, t)))
        .sum()
}

/// `a ≤ b` up to a relative `1e-12`, for comparing sums accumulated in different
/// orders. Infinities compare exactly.
pub fn le(a: f64, b: f64) -> bool {
    a <= b || (a.is_finite() && b.is_finite() && a - b <= 1e-12 * a.abs().max(b.abs()))
}

/// Tuples with fewer than `bound` common neighbors.
pub fn count_below(g: &Graph, factors: &[Vec<usize>], t: &[usize], bound: f64) -> u64 {
    tuples(factors).into_iter().filter(|q| (codegree(g, q, t) as f64) < bound).count() as u64
}

/// `G(n, p)` built from a private generator.
pub fn gnp(n: usize, p: f64, rng: &mut Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Random subset with inclusion probability `p`; never empty.
pub fn subset(n: usize, p: f64, rng: &mut Rng) -> Vec<usize> {
    let mut s: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < p).collect();
    if s.is_empty() {
        s.push(rng.gen_range(0..n));
    }
    s
}

pub fn set(n: usize, members: &[usize]) -> VertexSet {
    VertexSet::from_vertices(n, members).unwrap()
}

pub fn seeded(seed: u64) -> Rng {
    rng_from(seed ^ 0x5eed_0f_0a11)
}

/// Check that `map` is an injective homomorphism of `h` into `g`.
pub fn is_embedding(h: &Graph, g: &Graph, map: &[usize]) -> bool {
    if map.len() != h.n() || map.iter().any(|&v| v >= g.n()) {
        return false;
    }
    let mut seen = map.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    (0..h.n()).all(|u| (u + 1..h.n()).all(|v| !h.has_edge(u, v) || g.has_edge(map[u], map[v])))
}

/// `|U_1|, |U_2|, …` where `U_1 = V` and `U_{i+1}` keeps the vertices of degree at
/// least `threshold` in `H[U_i]` (one pass per layer, no cascading). Stops at 0 or a
/// fixed point.
pub fn peel_sizes(h: &Graph, threshold: usize) -> Vec<usize> {
    let mut alive: Vec<bool> = vec![true; h.n()];
    let mut sizes = vec![h.n()];
    loop {
        let keep: Vec<bool> = (0..h.n())
            .map(|v| alive[v] && h.neighbors(v).filter(|&u| alive[u]).count() >= threshold)
            .collect();
        let size = keep.iter().filter(|&&b| b).count();
        sizes.push(size);
        if size == 0 || size == *sizes.iter().rev().nth(1).unwrap() {
            return sizes;
        }
        alive = keep;
    }
}
