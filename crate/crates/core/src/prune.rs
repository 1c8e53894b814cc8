//! Concentration pruning and the random `[k] × [r]` partition of the host sets.

use crate::defect::{defect_power, DefectError, DefectParams, EvalMode, Evaluator, MomentResult};
use crate::drc::{las_vegas, union_except, Attempt, DrcError};
use crate::graph::{Graph, GraphError, VertexSet};
use crate::report::{all_passed, first_failure, Check, SAFETY_SIGMAS};
use crate::rng::{derive, stream, tag, unit_f64};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PruneError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Defect(#[from] DefectError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl From<DrcError> for PruneError {
    fn from(e: DrcError) -> Self {
        match e {
            DrcError::Defect(d) => PruneError::Defect(d),
            DrcError::Graph(g) => PruneError::Graph(g),
            DrcError::BadParams(m) | DrcError::Precondition(m) => PruneError::BadParams(m),
        }
    }
}

// ============================================================================
// Concentration pruning
// ============================================================================

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneParams {
    pub d: usize,
    pub s: u32,
    pub theta: f64,
    /// Per-vertex sums are enumerated when `|A_{-i}|^d` is at most this.
    pub exact_budget: u64,
    /// Tuples sampled per vertex otherwise.
    pub per_vertex_samples: usize,
    pub evaluator: Evaluator,
}

impl Default for PruneParams {
    fn default() -> Self {
        PruneParams {
            d: 2,
            s: 8,
            theta: 1.0,
            exact_budget: 4_000_000,
            per_vertex_samples: 2_000,
            evaluator: Evaluator::default(),
        }
    }
}

/// `Σ_{Q ∋ v, Q ∈ pool^d} ω_θ(Q; target)^s` for every `v` in `pool`.
#[derive(Clone, Debug, PartialEq)]
pub struct Concentration {
    pub pool: Vec<usize>,
    pub sums: Vec<f64>,
    /// Zero in exact mode.
    pub std_errors: Vec<f64>,
    pub mode: EvalMode,
}

impl Concentration {
    /// Largest per-vertex upper estimate (sum plus the safety margin when sampled).
    pub fn max_upper(&self) -> f64 {
        self.sums
            .iter()
            .zip(&self.std_errors)
            .map(|(s, e)| s + SAFETY_SIGMAS * e)
            .fold(0.0, f64::max)
    }
}

pub fn concentration(
    g: &Graph,
    pool_set: &VertexSet,
    target: &VertexSet,
    p: &PruneParams,
    seed: u64,
) -> Result<Concentration, PruneError> {
    g.check_set(pool_set)?;
    g.check_set(target)?;
    if p.d == 0 {
        return Err(PruneError::BadParams("d must be at least 1".into()));
    }
    let pool = pool_set.to_vec();
    let n = pool.len();
    let d = p.d;
    let exec = p.evaluator.exec;
    if n == 0 {
        return Ok(Concentration { pool, sums: vec![], std_errors: vec![], mode: EvalMode::Exact });
    }
    let size = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if size <= p.exact_budget as u128 {
        // Split the enumeration on the first coordinate; partial sums are merged in
        // index order.
        let partials = exec.map(n, |first| {
            let mut acc = vec![0.0; n];
            let mut idx = vec![0usize; d];
            idx[0] = first;
            let mut tuple = vec![0usize; d];
            let mut scratch = Vec::new();
            let mut seen = Vec::with_capacity(d);
            loop {
                for (t, &i) in tuple.iter_mut().zip(&idx) {
                    *t = pool[i];
                }
                let c = g.codegree_scratch(&tuple, target, &mut scratch);
                let w = defect_power(p.theta, p.s, c);
                if w != 0.0 {
                    seen.clear();
                    for &i in &idx {
                        if !seen.contains(&i) {
                            seen.push(i);
                            acc[i] += w;
                        }
                    }
                }
                // Odometer over coordinates 1..d.
                let mut k = d;
                loop {
                    if k == 1 {
                        return acc;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < n {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        });
        let mut sums = vec![0.0; n];
        for part in partials {
            for (s, v) in sums.iter_mut().zip(part) {
                *s += v;
            }
        }
        return Ok(Concentration { pool, sums, std_errors: vec![0.0; n], mode: EvalMode::Exact });
    }
    if p.per_vertex_samples < 2 {
        return Err(PruneError::BadParams("per_vertex_samples must be at least 2".into()));
    }
    // Importance sampling: fix v at a uniform position, fill the rest uniformly. A tuple
    // holding v in `c` positions is drawn with probability c / (d n^{d-1}).
    let weight = d as f64 * (n as f64).powi(d as i32 - 1);
    let k = p.per_vertex_samples;
    let per_vertex = exec.map(n, |vi| {
        let mut rng = stream(seed, tag("concentration"), vi as u64);
        let mut tuple = vec![0usize; d];
        let mut scratch = Vec::new();
        let (mut mean, mut m2) = (0.0f64, 0.0f64);
        for j in 0..k {
            let pos = rng.gen_range(0..d);
            for (a, t) in tuple.iter_mut().enumerate() {
                *t = if a == pos { pool[vi] } else { pool[rng.gen_range(0..n)] };
            }
            let c = g.codegree_scratch(&tuple, target, &mut scratch);
            let w = defect_power(p.theta, p.s, c);
            let hits = tuple.iter().filter(|&&u| u == pool[vi]).count() as f64;
            let x = if w == 0.0 { 0.0 } else { w * weight / hits };
            if x.is_infinite() {
                return (f64::INFINITY, f64::INFINITY);
            }
            let delta = x - mean;
            mean += delta / (j + 1) as f64;
            m2 += delta * (x - mean);
        }
        let var = m2 / (k - 1) as f64;
        (mean, (var / k as f64).sqrt())
    });
    let (sums, std_errors) = per_vertex.into_iter().unzip();
    Ok(Concentration { pool, sums, std_errors, mode: EvalMode::Sampled })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneSetReport {
    /// `|A_{-i}|^{d - 5/8}`.
    pub threshold: f64,
    pub removed: Vec<usize>,
    pub mode: EvalMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneOutcome {
    pub success: bool,
    pub sets: Vec<VertexSet>,
    pub removed: VertexSet,
    pub per_set: Vec<PruneSetReport>,
    pub checks: Vec<Check>,
    /// Unmet hypotheses (`s ≥ 4d`, moments below 1); the run proceeds regardless.
    pub hypotheses: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

fn mutual_moment(g: &Graph, sets: &[VertexSet], j: usize, p: &PruneParams, seed: u64) -> Result<Option<MomentResult>, PruneError> {
    let others = union_except(sets, j);
    if others.is_empty() || sets[j].is_empty() {
        return Ok(None);
    }
    let params = DefectParams::new(p.theta, p.s, p.d)?;
    Ok(Some(p.evaluator.moment(g, &params, &vec![&others; p.d], &sets[j], seed)?))
}

/// Remove from every set each vertex whose tuples carry too much of some set's defect
/// mass, then measure the size, moment and concentration guarantees on the result.
pub fn remove_concentrated(g: &Graph, sets: &[VertexSet], p: &PruneParams, seed: u64) -> Result<PruneOutcome, PruneError> {
    if sets.is_empty() {
        return Err(PruneError::BadParams("no sets".into()));
    }
    if !(p.theta > 0.0) {
        return Err(PruneError::BadParams("theta must be positive".into()));
    }
    for s in sets {
        g.check_set(s)?;
    }
    let r = sets.len();
    let d = p.d;
    let exponent = d as f64 - 5.0 / 8.0;
    let mut hypotheses = Vec::new();
    if (p.s as usize) < 4 * d {
        hypotheses.push(format!("s = {} < 4d = {}", p.s, 4 * d));
    }

    let mut before = Vec::with_capacity(r);
    for j in 0..r {
        let m = mutual_moment(g, sets, j, p, derive(seed, tag("prune-before"), j as u64))?;
        if let Some(m) = &m {
            if m.value >= 1.0 {
                hypotheses.push(format!("mu(A_-{0}^d; A_{0}) = {1} >= 1", j + 1, m.value));
            }
        }
        before.push(m);
    }

    let mut removed = VertexSet::empty(g.n());
    let mut per_set = Vec::with_capacity(r);
    for i in 0..r {
        let others = union_except(sets, i);
        let threshold = (others.len() as f64).powf(exponent);
        let conc = concentration(g, &others, &sets[i], p, derive(seed, tag("prune-conc"), i as u64))?;
        let out: Vec<usize> = conc
            .pool
            .iter()
            .zip(conc.sums.iter().zip(&conc.std_errors))
            .filter(|(_, (s, e))| *s + SAFETY_SIGMAS * *e >= threshold)
            .map(|(&v, _)| v)
            .collect();
        for &v in &out {
            removed.insert(v);
        }
        per_set.push(PruneSetReport { threshold, removed: out, mode: conc.mode });
    }

    let pruned: Vec<VertexSet> = sets.iter().map(|s| s.difference(&removed)).collect();
    let floor = 2f64.powf(-1.0 / (2.0 * d as f64));
    let mut checks = Vec::new();
    for j in 0..r {
        checks.push(Check::at_least(format!("|B_{}|", j + 1), pruned[j].len() as f64, floor * sets[j].len() as f64));
        let mseed = derive(seed, tag("prune-after"), j as u64);
        if let (Some(a), Some(b)) = (&before[j], mutual_moment(g, &pruned, j, p, mseed)?) {
            checks.push(Check::moment_at_most(format!("mu(B_-{0}^d; B_{0})", j + 1), &b, 2.0 * a.value, mseed));
        }
        let others = union_except(&pruned, j);
        if !others.is_empty() {
            let conc = concentration(g, &others, &pruned[j], p, derive(seed, tag("prune-conc-after"), j as u64))?;
            let bound = 2.0 * (others.len() as f64).powf(exponent);
            let mut c = Check::at_most(format!("concentration into B_{}", j + 1), conc.max_upper(), bound);
            c.mode = conc.mode;
            checks.push(c);
        }
    }
    let success = all_passed(&checks);
    let failure = first_failure(&checks).map(str::to_string);
    Ok(PruneOutcome { success, sets: pruned, removed, per_set, checks, hypotheses, failure })
}

// ============================================================================
// Random partition
// ============================================================================

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionParams {
    /// `p_i` per layer; `k = p.len()`.
    pub p: Vec<f64>,
    pub theta: f64,
    pub d: usize,
    pub s: u32,
    pub eps: f64,
    pub eps_prime: f64,
    pub max_restarts: usize,
    /// Tuples sampled per `(i, j)` for the neighborhood-share event.
    pub e1_samples: usize,
    pub evaluator: Evaluator,
}

impl Default for PartitionParams {
    fn default() -> Self {
        PartitionParams {
            p: vec![1.0],
            theta: 1.0,
            d: 2,
            s: 8,
            eps: 0.5,
            eps_prime: 0.01,
            max_restarts: 50,
            e1_samples: 100_000,
            evaluator: Evaluator::default(),
        }
    }
}

impl PartitionParams {
    pub fn k(&self) -> usize {
        self.p.len()
    }

    /// `q_i = p_i / r`.
    pub fn q(&self, r: usize) -> Vec<f64> {
        self.p.iter().map(|p| p / r as f64).collect()
    }

    /// `θ_i = p_i θ / (2r)`.
    pub fn thetas(&self, r: usize) -> Vec<f64> {
        self.p.iter().map(|p| p * self.theta / (2.0 * r as f64)).collect()
    }

    fn validate(&self) -> Result<(), PruneError> {
        let bad = |m: &str| Err(PruneError::BadParams(m.into()));
        if self.p.is_empty() || self.p.iter().any(|&p| !(p > 0.0)) {
            return bad("p must be a nonempty list of positive reals");
        }
        if self.p.iter().sum::<f64>() > 1.0 + 1e-9 {
            return bad("p must sum to at most 1");
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad("theta must be positive and finite");
        }
        if self.d == 0 || self.max_restarts == 0 {
            return bad("d and max_restarts must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct E1Report {
    pub sampled: usize,
    /// Sampled tuples with `|N(Q; B_j)| < θ`, outside the event's scope.
    pub below_theta: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionOutcome {
    pub success: bool,
    /// `sets[i][j] = V_i^{(j)}`.
    pub sets: Vec<Vec<VertexSet>>,
    pub q: Vec<f64>,
    pub thetas: Vec<f64>,
    pub seed: u64,
    /// Accepted draw, or `None` when the reported draw is the best failing one.
    pub restart: Option<usize>,
    pub attempts: usize,
    pub checks: Vec<Check>,
    pub e1: E1Report,
    /// Unmet hypotheses (`p_i ≥ m^{-1/(10d)}`); the run proceeds regardless.
    pub hypotheses: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl PartitionOutcome {
    /// Slot-major host sets, `i·r + j`.
    pub fn slot_targets(&self) -> Vec<VertexSet> {
        self.sets.iter().flat_map(|row| row.iter().cloned()).collect()
    }
}

/// Per-vertex color from a counter-based draw: `Some((i, j))` with probability `q_i`.
fn color_of(key: u64, v: usize, cumulative: &[f64], r: usize) -> Option<(usize, usize)> {
    let u = unit_f64(derive(key, tag("vertex-color"), v as u64));
    let slot = cumulative.iter().position(|&c| u < c)?;
    Some((slot / r, slot % r))
}

/// Multisets of size `d` over `0..n`, as nondecreasing index lists.
fn multisets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    if n == 0 {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] + 1 < n {
                let v = cur[k] + 1;
                for c in &mut cur[k..] {
                    *c = v;
                }
                break;
            }
        }
    }
}

pub fn random_partition(g: &Graph, sets: &[VertexSet], p: &PartitionParams, seed: u64) -> Result<PartitionOutcome, PruneError> {
    p.validate()?;
    if sets.is_empty() {
        return Err(PruneError::BadParams("no sets".into()));
    }
    for s in sets {
        g.check_set(s)?;
    }
    let r = sets.len();
    let k = p.k();
    let d = p.d;
    let q = p.q(r);
    let thetas = p.thetas(r);
    let m = sets.iter().map(VertexSet::len).max().unwrap_or(0).max(1);
    let floor = (m as f64).powf(-1.0 / (10.0 * d as f64));
    let hypotheses: Vec<String> = p
        .p
        .iter()
        .enumerate()
        .filter(|(_, &pi)| pi < floor)
        .map(|(i, pi)| format!("p_{} = {pi} < m^(-1/(10d)) = {floor}", i + 1))
        .collect();
    let mut cumulative = Vec::with_capacity(k * r);
    let mut acc = 0.0;
    for qi in &q {
        for _ in 0..r {
            acc += qi;
            cumulative.push(acc);
        }
    }
    let others: Vec<VertexSet> = (0..r).map(|j| union_except(sets, j)).collect();
    let params = DefectParams::new(p.theta, p.s, d)?;
    let ev = p.evaluator;
    let mut base = Vec::with_capacity(r);
    for j in 0..r {
        base.push(if others[j].is_empty() || sets[j].is_empty() {
            None
        } else {
            Some(ev.moment(g, &params, &vec![&others[j]; d], &sets[j], derive(seed, tag("partition-base"), j as u64))?)
        });
    }
    let factor = if r == 2 { 4.0 } else { 4.0 * (r as f64).powi(d as i32) * p.eps.powi(-(d as i32)) };
    let label = tag("random-partition");
    let floor_e3 = 2f64.powf(-1.0 / (2.0 * d as f64));

    let l = las_vegas(ev.exec, p.max_restarts, |attempt| {
        let key = derive(seed, label, attempt as u64);
        let mut parts = vec![vec![VertexSet::empty(g.n()); r]; k];
        let mut all = VertexSet::empty(g.n());
        for s in sets {
            all.union_with(s);
        }
        for v in all.iter() {
            if let Some((i, j)) = color_of(key, v, &cumulative, r) {
                if sets[j].contains(v) {
                    parts[i][j].insert(v);
                }
            }
        }
        let mut checks = Vec::new();
        // E3: size window.
        for i in 0..k {
            for j in 0..r {
                let mean = q[i] * sets[j].len() as f64;
                let size = parts[i][j].len() as f64;
                checks.push(Check::at_least(format!("E3 |V_{}^{}| low", i + 1, j + 1), size, floor_e3 * mean));
                checks.push(Check::at_most(format!("E3 |V_{}^{}| high", i + 1, j + 1), size, 2.0 * mean));
            }
        }
        let mut e1 = E1Report { sampled: 0, below_theta: 0, violations: 0 };
        if !all_passed(&checks) {
            return Ok(Attempt { witness: vec![], checks, payload: (parts, e1) });
        }
        // E1: neighborhood share, on sampled tuples from B_{-j}^d.
        for j in 0..r {
            let pool = others[j].to_vec();
            if pool.is_empty() {
                continue;
            }
            for i in 0..k {
                let mut rng = stream(key, tag("e1-sample"), (i * r + j) as u64);
                let mut tuple = vec![0usize; d];
                let mut scratch = Vec::new();
                let mut bad = 0;
                for _ in 0..p.e1_samples {
                    for t in tuple.iter_mut() {
                        *t = pool[rng.gen_range(0..pool.len())];
                    }
                    e1.sampled += 1;
                    let whole = g.codegree_scratch(&tuple, &sets[j], &mut scratch);
                    if (whole as f64) < p.theta {
                        e1.below_theta += 1;
                        continue;
                    }
                    let part = g.codegree_scratch(&tuple, &parts[i][j], &mut scratch);
                    if (part as f64) < 0.5 * q[i] * whole as f64 {
                        bad += 1;
                    } else {
                        let wb = crate::defect::defect_of_codegree(p.theta, whole);
                        let wv = crate::defect::defect_of_codegree(thetas[i], part);
                        assert!(wv <= wb * (1.0 + 1e-12), "defect dominance violated");
                    }
                }
                e1.violations += bad;
                checks.push(Check::at_most(format!("E1 V_{}^{} violations", i + 1, j + 1), bad as f64, 0.0));
            }
        }
        if !all_passed(&checks) {
            return Ok(Attempt { witness: vec![], checks, payload: (parts, e1) });
        }
        // E2: moments of V-products into B_j, over factor multisets.
        for j in 0..r {
            let Some(b) = &base[j] else { continue };
            let bound = p.eps_prime.max(factor * b.value);
            let cells: Vec<(usize, usize)> =
                (0..k).flat_map(|i| (0..r).filter(move |&jj| jj != j).map(move |jj| (i, jj))).collect();
            for (c, ms) in multisets(cells.len(), d).into_iter().enumerate() {
                let factors: Vec<&VertexSet> = ms.iter().map(|&x| &parts[cells[x].0][cells[x].1]).collect();
                if factors.iter().any(|f| f.is_empty()) {
                    continue;
                }
                let mseed = derive(key, tag("e2"), (j * 1_000_003 + c) as u64);
                let m = ev.moment(g, &params, &factors, &sets[j], mseed)?;
                let name = format!(
                    "E2 mu({}; B_{})",
                    ms.iter().map(|&x| format!("V_{}^{}", cells[x].0 + 1, cells[x].1 + 1)).collect::<Vec<_>>().join("x"),
                    j + 1
                );
                checks.push(Check::moment_at_most(name, &m, bound, mseed));
            }
        }
        Ok(Attempt { witness: vec![], checks, payload: (parts, e1) })
    })?;

    let (parts, e1) = l.best.payload;
    let success = l.accepted.is_some();
    if success {
        for (i, row) in parts.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!(v.is_subset_of(&sets[j]), "V_{i}^{j} escapes B_{j}");
            }
        }
        let flat: Vec<&VertexSet> = parts.iter().flatten().collect();
        for a in 0..flat.len() {
            for b in a + 1..flat.len() {
                assert!(flat[a].is_disjoint(flat[b]), "partition cells overlap");
            }
        }
    }
    let failure = (!success).then(|| {
        format!("no draw passed within {} restarts (best failed at {})", l.attempts, first_failure(&l.best.checks).unwrap_or("?"))
    });
    Ok(PartitionOutcome {
        success,
        sets: parts,
        q,
        thetas,
        seed,
        restart: l.accepted,
        attempts: l.attempts,
        checks: l.best.checks,
        e1,
        hypotheses,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defect::moment_exact;
    use crate::graph::random_graph;

    #[test]
    fn zero_defects_remove_nothing() {
        let g = Graph::complete(30);
        let sets = vec![VertexSet::range(30, 0, 15), VertexSet::range(30, 15, 30)];
        let p = PruneParams { d: 1, s: 4, theta: 5.0, ..PruneParams::default() };
        let out = remove_concentrated(&g, &sets, &p, 1).unwrap();
        assert!(out.removed.is_empty());
        assert_eq!(out.sets, sets);
        assert!(out.success);
    }

    #[test]
    fn isolated_vertex_is_removed() {
        // Vertex 0 sees nothing of A_2; every tuple through it has infinite defect.
        let mut edges = Vec::new();
        for u in 1..10 {
            for v in 10..20 {
                edges.push((u, v));
            }
        }
        let g = Graph::from_edges(20, &edges).unwrap();
        let sets = vec![VertexSet::range(20, 0, 10), VertexSet::range(20, 10, 20)];
        let p = PruneParams { d: 1, s: 4, theta: 2.0, ..PruneParams::default() };
        let out = remove_concentrated(&g, &sets, &p, 1).unwrap();
        assert!(out.removed.contains(0));
        assert!(!out.sets[0].contains(0));
    }

    /// Independent per-vertex sum: loop over all tuples with a plain `defect` call.
    fn brute_concentration(g: &Graph, pool: &VertexSet, target: &VertexSet, d: usize, s: u32, theta: f64) -> Vec<f64> {
        let members = pool.to_vec();
        let n = members.len();
        let mut sums = vec![0.0; n];
        let total = n.pow(d as u32);
        for code in 0..total {
            let mut c = code;
            let mut idx = Vec::with_capacity(d);
            for _ in 0..d {
                idx.push(c % n);
                c /= n;
            }
            let q: Vec<usize> = idx.iter().map(|&i| members[i]).collect();
            let w = crate::defect::defect(g, theta, &q, target).unwrap();
            let ws = if s == 0 { f64::from(u8::from(w != 0.0)) } else if w == 0.0 { 0.0 } else { w.powi(s as i32) };
            let mut distinct = idx.clone();
            distinct.sort_unstable();
            distinct.dedup();
            for i in distinct {
                sums[i] += ws;
            }
        }
        sums
    }

    #[test]
    fn exact_concentration_matches_brute_force() {
        let g = random_graph(40, 0.4, 3).unwrap();
        let pool = VertexSet::range(40, 0, 18);
        let target = VertexSet::range(40, 18, 40);
        let p = PruneParams { d: 2, s: 2, theta: 6.0, ..PruneParams::default() };
        let c = concentration(&g, &pool, &target, &p, 0).unwrap();
        let want = brute_concentration(&g, &pool, &target, 2, 2, 6.0);
        for (a, b) in c.sums.iter().zip(&want) {
            assert!(a == b || (a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn sampled_concentration_tracks_exact() {
        let g = random_graph(60, 0.5, 8).unwrap();
        let pool = VertexSet::range(60, 0, 30);
        let target = VertexSet::range(60, 30, 60);
        let exact = PruneParams { d: 2, s: 1, theta: 10.0, ..PruneParams::default() };
        let sampled = PruneParams { exact_budget: 0, per_vertex_samples: 20_000, ..exact.clone() };
        let a = concentration(&g, &pool, &target, &exact, 0).unwrap();
        let b = concentration(&g, &pool, &target, &sampled, 0).unwrap();
        assert_eq!(b.mode, EvalMode::Sampled);
        let misses = a.sums.iter().zip(b.sums.iter().zip(&b.std_errors)).filter(|(x, (y, e))| (*x - *y).abs() > 4.0 * *e + 1e-9).count();
        assert!(misses <= 1, "{misses} vertices off by more than 4 se");
    }

    #[test]
    fn random_prune_conclusions_rederive() {
        let g = random_graph(300, 0.5, 5).unwrap();
        let sets = vec![VertexSet::range(300, 0, 150), VertexSet::range(300, 150, 300)];
        let p = PruneParams { d: 2, s: 8, theta: 24.0, ..PruneParams::default() };
        let out = remove_concentrated(&g, &sets, &p, 2).unwrap();
        assert!(out.hypotheses.is_empty(), "{:?}", out.hypotheses);
        let exp = 2.0 - 5.0 / 8.0;
        for j in 0..2 {
            assert!(out.sets[j].len() as f64 >= 2f64.powf(-0.25) * 150.0);
            let others = &out.sets[1 - j];
            let sums = brute_concentration(&g, others, &out.sets[j], 2, 8, 24.0);
            let bound = 2.0 * (others.len() as f64).powf(exp);
            assert!(sums.iter().all(|&s| s <= bound));
            let dp = DefectParams::new(24.0, 8, 2).unwrap();
            let mb = moment_exact(&g, &dp, &[others, others], &out.sets[j]).unwrap().value;
            let ma = moment_exact(&g, &dp, &[&sets[1 - j], &sets[1 - j]], &sets[j]).unwrap().value;
            assert!(mb <= 2.0 * ma);
        }
    }

    #[test]
    fn trivial_partition() {
        let g = random_graph(50, 0.5, 1).unwrap();
        let b = VertexSet::full(50);
        let p = PartitionParams { p: vec![1.0], d: 1, ..PartitionParams::default() };
        let out = random_partition(&g, &[b.clone()], &p, 3).unwrap();
        assert!(out.success);
        assert_eq!(out.sets[0][0], b);
    }

    #[test]
    fn complete_host_partition() {
        let g = Graph::complete(400);
        let sets = vec![VertexSet::range(400, 0, 200), VertexSet::range(400, 200, 400)];
        let p = PartitionParams { p: vec![0.5, 0.5], theta: 10.0, d: 2, s: 8, e1_samples: 2000, ..PartitionParams::default() };
        let out = random_partition(&g, &sets, &p, 3).unwrap();
        assert!(out.success, "{:?}", out.failure);
        assert_eq!(out.thetas, vec![1.25, 1.25]);
        assert_eq!(out.slot_targets().len(), 4);
    }

    #[test]
    fn partition_is_seed_deterministic() {
        let g = random_graph(300, 0.5, 2).unwrap();
        let sets = vec![VertexSet::range(300, 0, 150), VertexSet::range(300, 150, 300)];
        let p = PartitionParams { p: vec![0.6, 0.4], theta: 8.0, d: 2, s: 4, e1_samples: 1000, ..PartitionParams::default() };
        let a = random_partition(&g, &sets, &p, 17).unwrap();
        let b = random_partition(&g, &sets, &p, 17).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn multiset_count() {
        assert_eq!(multisets(3, 2).len(), 6);
        assert_eq!(multisets(1, 4), vec![vec![0; 4]]);
    }
}
