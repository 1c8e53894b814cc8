//! θ-defects of vertex tuples and their moments over product sets.
//!
//! For a tuple `Q` and target set `T`, the defect is `0` when `Q` has at least `θ`
//! common neighbors in `T`, `θ / |N(Q;T)|` when it has fewer but some, and `+∞` when it
//! has none. The `s`-th moment over a product set `F_1 × … × F_d` is the average of
//! `defect^s` over all tuples (repetitions across factors included). For `s = 0` the
//! summand is the indicator of a nonzero defect.
//!
//! The defect depends on a tuple only through its codegree `|N(Q;T)|`, so exact moments
//! are computed from a [`CodegreeHistogram`]: integer counts of tuples by codegree.
//! Integer histograms merge exactly, which makes exact results independent of how the
//! tuple space is split across workers.

use crate::exec::Exec;
use crate::graph::{Graph, GraphError, VertexSet};
use crate::real::ext_real;
use crate::rng::{stream, tag};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on tuple evaluations for exact enumeration.
pub const DEFAULT_EXACT_BUDGET: u64 = 100_000_000;
/// Default number of sampled tuples when a product is too large to enumerate.
pub const DEFAULT_SAMPLES: usize = 100_000;

const SAMPLE_BLOCK: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DefectError {
    #[error("theta must be positive and finite, got {0}")]
    BadTheta(f64),
    #[error("tuple arity must be at least 1")]
    ZeroArity,
    #[error("expected {expected} factors, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("factor {0} is empty, so the product set is empty")]
    EmptyFactor(usize),
    #[error("{tuples} tuples exceed the exact budget of {budget}; use moment_sampled")]
    BudgetExceeded { tuples: u128, budget: u64 },
    #[error("at least one sample is required")]
    NoSamples,
    #[error("moment order s must be at least 1 here")]
    NeedPositiveOrder,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectParams {
    pub theta: f64,
    pub s: u32,
    pub d: usize,
}

impl DefectParams {
    pub fn new(theta: f64, s: u32, d: usize) -> Result<Self, DefectError> {
        let p = DefectParams { theta, s, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DefectError> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(DefectError::BadTheta(self.theta));
        }
        if self.d == 0 {
            return Err(DefectError::ZeroArity);
        }
        Ok(())
    }
}

/// Defect of a tuple with `codegree` common neighbors.
#[inline]
pub fn defect_of_codegree(theta: f64, codegree: usize) -> f64 {
    if codegree as f64 >= theta {
        0.0
    } else if codegree == 0 {
        f64::INFINITY
    } else {
        theta / codegree as f64
    }
}

/// `defect^s`, with `s = 0` meaning the indicator of a nonzero defect.
#[inline]
pub fn defect_power(theta: f64, s: u32, codegree: usize) -> f64 {
    let w = defect_of_codegree(theta, codegree);
    if s == 0 {
        if w == 0.0 {
            0.0
        } else {
            1.0
        }
    } else if w == 0.0 {
        0.0
    } else {
        w.powi(s as i32)
    }
}

/// `ω_θ(q; t)`.
pub fn defect(g: &Graph, theta: f64, q: &[usize], t: &VertexSet) -> Result<f64, DefectError> {
    if !(theta > 0.0) {
        return Err(DefectError::BadTheta(theta));
    }
    g.check_set(t)?;
    for &v in q {
        g.check_vertex(v)?;
    }
    Ok(defect_of_codegree(theta, g.codegree(q, t)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    #[serde(with = "ext_real")]
    pub value: f64,
    pub mode: EvalMode,
    /// 0 in exact mode.
    pub sample_count: usize,
    #[serde(with = "ext_real")]
    pub std_error: f64,
    /// Tuples (enumerated or sampled) with an empty common neighborhood. For `s >= 1`
    /// the value is infinite exactly when this is nonzero.
    pub infinite_hits: u64,
}

// ============================================================================
// Exact enumeration
// ============================================================================

/// Counts of tuples by codegree, for codegrees below `cap`, plus the total tuple count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodegreeHistogram {
    pub counts: Vec<u64>,
    pub total: u128,
}

impl CodegreeHistogram {
    /// Smallest cap that resolves every codegree below `theta`.
    pub fn cap_for(theta: f64) -> usize {
        if theta.is_finite() && theta > 0.0 {
            theta.ceil() as usize
        } else {
            0
        }
    }

    /// `Σ_Q ω_θ(Q)^s`. The histogram must resolve every codegree below `theta`.
    pub fn power_sum(&self, theta: f64, s: u32) -> f64 {
        let mut sum = 0.0;
        for (c, &count) in self.counts.iter().enumerate() {
            if count > 0 {
                sum += count as f64 * defect_power(theta, s, c);
            }
        }
        sum
    }

    pub fn moment(&self, theta: f64, s: u32) -> f64 {
        self.power_sum(theta, s) / self.total as f64
    }

    pub fn empty_hits(&self) -> u64 {
        self.counts.first().copied().unwrap_or(0)
    }

    /// Tuples with codegree strictly below `bound` (requires `bound <= cap`).
    pub fn count_below(&self, bound: f64) -> u64 {
        self.counts.iter().enumerate().filter(|&(c, _)| (c as f64) < bound).map(|(_, &k)| k).sum()
    }

    fn merge(&mut self, other: &CodegreeHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }
}

pub fn product_size<F: AsRef<VertexSet>>(factors: &[F]) -> u128 {
    factors.iter().map(|f| f.as_ref().len() as u128).product()
}

impl AsRef<VertexSet> for VertexSet {
    fn as_ref(&self) -> &VertexSet {
        self
    }
}

struct Enumerator<'a> {
    g: &'a Graph,
    factors: Vec<Vec<usize>>,
    suffix_products: Vec<u64>,
    cap: usize,
    target: &'a VertexSet,
}

impl Enumerator<'_> {
    fn walk(&self, depth: usize, cur: &[u64], bufs: &mut [Vec<u64>], counts: &mut [u64]) {
        let d = self.factors.len();
        if cur.iter().all(|&w| w == 0) {
            // Every extension also has an empty neighborhood.
            if self.cap > 0 {
                counts[0] += self.suffix_products[depth];
            }
            return;
        }
        if depth == d {
            let c: usize = cur.iter().map(|w| w.count_ones() as usize).sum();
            if c < self.cap {
                counts[c] += 1;
            }
            return;
        }
        if depth + 1 == d {
            for &v in &self.factors[depth] {
                let row = self.g.row(v);
                let c: usize = cur.iter().zip(row).map(|(a, b)| (a & b).count_ones() as usize).sum();
                if c < self.cap {
                    counts[c] += 1;
                }
            }
            return;
        }
        let (head, tail) = bufs.split_first_mut().unwrap();
        for &v in &self.factors[depth] {
            for ((o, a), b) in head.iter_mut().zip(cur).zip(self.g.row(v)) {
                *o = a & b;
            }
            self.walk(depth + 1, head, tail, counts);
        }
    }
}

/// Exact codegree histogram over `F_1 × … × F_d` against target `t`.
fn histogram_exact(g: &Graph, factors: &[Vec<usize>], t: &VertexSet, cap: usize, exec: Exec) -> CodegreeHistogram {
    let d = factors.len();
    let mut suffix_products = vec![1u64; d + 1];
    for i in (0..d).rev() {
        suffix_products[i] = suffix_products[i + 1].saturating_mul(factors[i].len() as u64);
    }
    let en = Enumerator { g, factors: factors.to_vec(), suffix_products, cap, target: t };
    let words = g.words();

    // Split the outer `split` coordinates into independent tasks.
    let mut split = 0;
    let mut tasks = 1usize;
    while split < d && tasks < 256 {
        tasks *= factors[split].len();
        split += 1;
    }
    let per_task = en.exec_tasks(tasks, split, words, exec);
    let mut hist = CodegreeHistogram { counts: vec![0; cap], total: 0 };
    for h in &per_task {
        hist.merge(h);
    }
    hist.total = factors.iter().map(|f| f.len() as u128).product();
    hist
}

impl Enumerator<'_> {
    fn exec_tasks(&self, tasks: usize, split: usize, words: usize, exec: Exec) -> Vec<CodegreeHistogram> {
        let d = self.factors.len();
        exec.map(tasks, |task| {
            let mut counts = vec![0u64; self.cap];
            let mut cur = self.target.words().to_vec();
            let mut rem = task;
            let mut prefix = vec![0usize; split];
            for i in (0..split).rev() {
                let len = self.factors[i].len();
                prefix[i] = self.factors[i][rem % len];
                rem /= len;
            }
            for &v in &prefix {
                for (a, b) in cur.iter_mut().zip(self.g.row(v)) {
                    *a &= b;
                }
            }
            let mut bufs = vec![vec![0u64; words]; d.saturating_sub(split)];
            self.walk(split, &cur, &mut bufs, &mut counts);
            CodegreeHistogram { counts, total: 0 }
        })
    }
}

// ============================================================================
// Sampling
// ============================================================================

/// Running mean/variance (Welford), mergeable in a fixed order.
#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, o: &Welford) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        self.mean += delta * o.n as f64 / n as f64;
        self.m2 += o.m2 + delta * delta * (self.n as f64 * o.n as f64 / n as f64);
        self.n = n;
    }
}

fn sample_moment(
    g: &Graph,
    params: &DefectParams,
    factors: &[Vec<usize>],
    t: &VertexSet,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> MomentResult {
    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    let per_block = exec.map(blocks, |b| {
        let mut rng = stream(seed, tag("moment-sample"), b as u64);
        let len = SAMPLE_BLOCK.min(samples - b * SAMPLE_BLOCK);
        let mut acc = Welford::default();
        let mut empty = 0u64;
        let mut tuple = vec![0usize; factors.len()];
        let mut scratch = Vec::new();
        for _ in 0..len {
            for (slot, f) in tuple.iter_mut().zip(factors) {
                *slot = f[rng.gen_range(0..f.len())];
            }
            let c = g.codegree_scratch(&tuple, t, &mut scratch);
            if c == 0 {
                empty += 1;
            }
            let x = defect_power(params.theta, params.s, c);
            if x.is_finite() {
                acc.push(x);
            }
        }
        (acc, empty)
    });
    let mut acc = Welford::default();
    let mut empty = 0;
    for (w, e) in &per_block {
        acc.merge(w);
        empty += e;
    }
    let infinite = params.s > 0 && empty > 0;
    let (value, std_error) = if infinite {
        (f64::INFINITY, f64::INFINITY)
    } else if samples == 1 {
        (acc.mean, f64::INFINITY)
    } else {
        let var = acc.m2 / (samples - 1) as f64;
        (acc.mean, (var.max(0.0) / samples as f64).sqrt())
    };
    MomentResult { value, mode: EvalMode::Sampled, sample_count: samples, std_error, infinite_hits: empty }
}

// ============================================================================
// Evaluator
// ============================================================================

/// Budgets and execution mode for moment evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Evaluator {
    /// Products with more tuples than this are sampled (or refused by `moment_exact`).
    pub exact_budget: u64,
    pub samples: usize,
    pub exec: Exec,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator { exact_budget: DEFAULT_EXACT_BUDGET, samples: DEFAULT_SAMPLES, exec: Exec::default() }
    }
}

fn members<F: AsRef<VertexSet>>(g: &Graph, factors: &[F]) -> Result<Vec<Vec<usize>>, DefectError> {
    let mut out = Vec::with_capacity(factors.len());
    for (i, f) in factors.iter().enumerate() {
        let f = f.as_ref();
        g.check_set(f)?;
        if f.is_empty() {
            return Err(DefectError::EmptyFactor(i));
        }
        out.push(f.to_vec());
    }
    Ok(out)
}

fn check_shape<F: AsRef<VertexSet>>(g: &Graph, params: &DefectParams, factors: &[F], t: &VertexSet) -> Result<(), DefectError> {
    params.validate()?;
    if factors.len() != params.d {
        return Err(DefectError::ArityMismatch { expected: params.d, got: factors.len() });
    }
    g.check_set(t)?;
    Ok(())
}

impl Evaluator {
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Exact codegree histogram; `cap` bounds the codegrees resolved individually.
    pub fn histogram<F: AsRef<VertexSet>>(
        &self,
        g: &Graph,
        factors: &[F],
        t: &VertexSet,
        cap: usize,
    ) -> Result<CodegreeHistogram, DefectError> {
        g.check_set(t)?;
        let size = product_size(factors);
        if size > self.exact_budget as u128 {
            return Err(DefectError::BudgetExceeded { tuples: size, budget: self.exact_budget });
        }
        let m = members(g, factors)?;
        Ok(histogram_exact(g, &m, t, cap.min(t.len() + 1), self.exec))
    }

    pub fn moment_exact<F: AsRef<VertexSet>>(
        &self,
        g: &Graph,
        params: &DefectParams,
        factors: &[F],
        t: &VertexSet,
    ) -> Result<MomentResult, DefectError> {
        check_shape(g, params, factors, t)?;
        let cap = CodegreeHistogram::cap_for(params.theta);
        let h = self.histogram(g, factors, t, cap)?;
        Ok(MomentResult {
            value: h.moment(params.theta, params.s),
            mode: EvalMode::Exact,
            sample_count: 0,
            std_error: 0.0,
            infinite_hits: h.empty_hits(),
        })
    }

    pub fn moment_sampled<F: AsRef<VertexSet>>(
        &self,
        g: &Graph,
        params: &DefectParams,
        factors: &[F],
        t: &VertexSet,
        samples: usize,
        seed: u64,
    ) -> Result<MomentResult, DefectError> {
        check_shape(g, params, factors, t)?;
        if samples == 0 {
            return Err(DefectError::NoSamples);
        }
        let m = members(g, factors)?;
        Ok(sample_moment(g, params, &m, t, samples, seed, self.exec))
    }

    /// Exact when the product fits the budget, sampled with `self.samples` otherwise.
    pub fn moment<F: AsRef<VertexSet>>(
        &self,
        g: &Graph,
        params: &DefectParams,
        factors: &[F],
        t: &VertexSet,
        seed: u64,
    ) -> Result<MomentResult, DefectError> {
        if product_size(factors) <= self.exact_budget as u128 {
            self.moment_exact(g, params, factors, t)
        } else {
            self.moment_sampled(g, params, factors, t, self.samples, seed)
        }
    }

    /// Number of tuples `Q ∈ v1^d` with `|N(Q; v2)| < θ / |v1|^{d/s}`.
    pub fn count_low_codegree(
        &self,
        g: &Graph,
        params: &DefectParams,
        v1: &VertexSet,
        v2: &VertexSet,
    ) -> Result<u64, DefectError> {
        params.validate()?;
        if params.s == 0 {
            return Err(DefectError::NeedPositiveOrder);
        }
        let bound = params.theta / (v1.len() as f64).powf(params.d as f64 / params.s as f64);
        let factors = vec![v1; params.d];
        let h = self.histogram(g, &factors, v2, CodegreeHistogram::cap_for(bound))?;
        Ok(h.count_below(bound))
    }
}

pub fn moment_exact<F: AsRef<VertexSet>>(
    g: &Graph,
    params: &DefectParams,
    factors: &[F],
    t: &VertexSet,
) -> Result<MomentResult, DefectError> {
    Evaluator::default().moment_exact(g, params, factors, t)
}

pub fn moment_sampled<F: AsRef<VertexSet>>(
    g: &Graph,
    params: &DefectParams,
    factors: &[F],
    t: &VertexSet,
    samples: usize,
    seed: u64,
) -> Result<MomentResult, DefectError> {
    Evaluator::default().moment_sampled(g, params, factors, t, samples, seed)
}

pub fn count_low_codegree(g: &Graph, params: &DefectParams, v1: &VertexSet, v2: &VertexSet) -> Result<u64, DefectError> {
    Evaluator::default().count_low_codegree(g, params, v1, v2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite, random_graph};
    use proptest::prelude::*;

    fn all(n: usize) -> VertexSet {
        VertexSet::full(n)
    }

    #[test]
    fn defect_cases() {
        assert_eq!(defect_of_codegree(5.0, 10), 0.0);
        assert_eq!(defect_of_codegree(6.0, 2), 3.0);
        assert_eq!(defect_of_codegree(4.0, 0), f64::INFINITY);
        assert_eq!(defect_power(4.0, 0, 0), 1.0);
        assert_eq!(defect_power(4.0, 0, 9), 0.0);
        assert_eq!(defect_power(6.0, 2, 2), 9.0);
    }

    #[test]
    fn zero_moment_when_every_tuple_is_rich() {
        let g = Graph::complete(12);
        let p = DefectParams::new(3.0, 2, 2).unwrap();
        let a = VertexSet::range(12, 0, 4);
        let m = moment_exact(&g, &p, &[a.clone(), a.clone()], &all(12)).unwrap();
        assert_eq!(m.value, 0.0);
        assert_eq!(m.infinite_hits, 0);
        let sm = moment_sampled(&g, &p, &[a.clone(), a], &all(12), 1000, 1).unwrap();
        assert_eq!((sm.value, sm.std_error), (0.0, 0.0));
    }

    #[test]
    fn singleton_factor_is_the_defect() {
        let g = random_graph(15, 0.4, 2).unwrap();
        let t = all(15);
        for v in 0..15 {
            let p = DefectParams::new(7.5, 1, 1).unwrap();
            let f = VertexSet::from_vertices(15, &[v]).unwrap();
            let m = moment_exact(&g, &p, &[f.clone()], &t).unwrap();
            assert_eq!(m.value, defect(&g, 7.5, &[v], &t).unwrap());
            let one = moment_sampled(&g, &p, &[f], &t, 1, 4).unwrap();
            assert_eq!(one.value, m.value);
        }
    }

    #[test]
    fn infinite_moment_counts_empty_tuples() {
        let g = Graph::empty(5);
        let p = DefectParams::new(1.0, 1, 1).unwrap();
        let m = moment_exact(&g, &p, &[all(5)], &all(5)).unwrap();
        assert_eq!(m.value, f64::INFINITY);
        assert_eq!(m.infinite_hits, 5);
        let p0 = DefectParams::new(1.0, 0, 1).unwrap();
        assert_eq!(moment_exact(&g, &p0, &[all(5)], &all(5)).unwrap().value, 1.0);
    }

    #[test]
    fn budget_is_enforced() {
        let g = Graph::complete(30);
        let p = DefectParams::new(1.0, 1, 3).unwrap();
        let ev = Evaluator { exact_budget: 1000, ..Evaluator::default() };
        let f = vec![all(30); 3];
        assert!(matches!(ev.moment_exact(&g, &p, &f, &all(30)), Err(DefectError::BudgetExceeded { .. })));
        assert_eq!(ev.moment(&g, &p, &f, &all(30), 1).unwrap().mode, EvalMode::Sampled);
    }

    #[test]
    fn bad_inputs() {
        assert!(DefectParams::new(0.0, 1, 1).is_err());
        assert!(DefectParams::new(1.0, 1, 0).is_err());
        let g = Graph::complete(4);
        let p = DefectParams::new(1.0, 1, 2).unwrap();
        assert!(matches!(moment_exact(&g, &p, &[all(4)], &all(4)), Err(DefectError::ArityMismatch { .. })));
        let e = VertexSet::empty(4);
        assert!(matches!(moment_exact(&g, &p, &[all(4), e], &all(4)), Err(DefectError::EmptyFactor(1))));
    }

    #[test]
    fn low_codegree_examples() {
        let g = complete_bipartite(5, 7);
        let v1 = VertexSet::range(12, 0, 5);
        let v2 = VertexSet::range(12, 5, 12);
        let p = DefectParams::new(7.0, 2, 2).unwrap();
        assert_eq!(count_low_codegree(&g, &p, &v1, &v2).unwrap(), 0);
        let empty = Graph::empty(12);
        let p = DefectParams::new(50.0, 1, 2).unwrap();
        assert_eq!(count_low_codegree(&empty, &p, &v1, &v2).unwrap(), 25);
    }

    #[test]
    fn exec_modes_agree() {
        let g = random_graph(40, 0.5, 11).unwrap();
        let p = DefectParams::new(6.0, 3, 3).unwrap();
        let a = VertexSet::range(40, 0, 25);
        let f = vec![a.clone(), a.clone(), a];
        let seq = Evaluator::default().with_exec(Exec::Sequential);
        let par = Evaluator::default().with_exec(Exec::Parallel);
        assert_eq!(seq.moment_exact(&g, &p, &f, &all(40)).unwrap(), par.moment_exact(&g, &p, &f, &all(40)).unwrap());
        assert_eq!(
            seq.moment_sampled(&g, &p, &f, &all(40), 20_000, 5).unwrap(),
            par.moment_sampled(&g, &p, &f, &all(40), 20_000, 5).unwrap()
        );
    }

    proptest! {
        #[test]
        fn moment_monotone_in_order_threshold_and_target(
            n in 4usize..16, p in 0.2f64..0.9, seed in any::<u64>(),
            theta in 0.5f64..8.0, dtheta in 0.0f64..4.0, s in 0u32..4, ds in 0u32..3,
        ) {
            let g = random_graph(n, p, seed).unwrap();
            let a = VertexSet::range(n, 0, n / 2 + 1);
            let t = all(n);
            let t_small = VertexSet::range(n, 1, n);
            let f = vec![a.clone(), a];
            let lo = moment_exact(&g, &DefectParams::new(theta, s, 2).unwrap(), &f, &t).unwrap().value;
            let hi = moment_exact(&g, &DefectParams::new(theta + dtheta, s + ds, 2).unwrap(), &f, &t_small).unwrap().value;
            prop_assert!(lo <= hi, "{} > {}", lo, hi);
        }
    }
}
