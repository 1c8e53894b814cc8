//! Random greedy embedding of a layered pattern into per-slot host sets.
//!
//! Slots are processed from the last to the first. Inside a slot, pattern vertices are
//! placed in decreasing order of the defect of their already-embedded forward tuple, each
//! into the common neighborhood of that tuple inside the slot's host set, avoiding used
//! host vertices when at least half of the neighborhood is still free.
//!
//! When the forward tuples are padded, the dummy pattern vertices are first mapped to
//! dummy host vertices (ids `g.n()..g.n() + d_pad`), which are adjacent to everything,
//! and the top slot is then placed like every other slot with threshold `|V_top|`.

use crate::decompose::{DecomposeError, ForwardPlan, LayeredPartition};
use crate::defect::{defect_of_codegree, DefectError, DefectParams, EvalMode, Evaluator};
use crate::drc::{drc_bipartite, DrcError, DrcOutcome, DrcParams};
use crate::graph::{Graph, GraphError, VertexSet};
use crate::real::{ext_real, ext_real_vec};
use crate::rng::{derive, stream, tag, Rng};
use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("malformed plan: {0}")]
    Plan(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Drc(#[from] DrcError),
    #[error(transparent)]
    Defect(#[from] DefectError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Pattern layers, forward tuples, and one host set plus threshold per slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedPlan {
    pub partition: LayeredPartition,
    pub forward: ForwardPlan,
    /// `V` per slot; pairwise disjoint subsets of the host.
    pub targets: Vec<VertexSet>,
    /// `θ` per slot. The top slot's entry is `|V_top|`.
    pub thetas: Vec<f64>,
    /// Last slot with a nonempty pattern layer.
    pub top: usize,
}

impl EmbedPlan {
    pub fn new(
        partition: LayeredPartition,
        forward: ForwardPlan,
        targets: Vec<VertexSet>,
        mut thetas: Vec<f64>,
    ) -> Result<Self, EmbedError> {
        let slots = partition.slots();
        if targets.len() != slots || thetas.len() != slots {
            return Err(EmbedError::Plan(format!(
                "{slots} slots but {} targets and {} thetas",
                targets.len(),
                thetas.len()
            )));
        }
        if forward.pattern_n != partition.n {
            return Err(EmbedError::Plan("forward plan and partition disagree on the pattern size".into()));
        }
        let top = (0..slots)
            .rev()
            .find(|&s| !partition.slot_members(s).is_empty())
            .ok_or_else(|| EmbedError::Plan("empty pattern".into()))?;
        let universe = targets[0].universe();
        let mut seen = VertexSet::empty(universe);
        for (s, t) in targets.iter().enumerate() {
            if t.universe() != universe {
                return Err(EmbedError::Plan("targets live in different universes".into()));
            }
            if !seen.is_disjoint(t) {
                return Err(EmbedError::Plan(format!("target of slot {s} overlaps an earlier one")));
            }
            seen.union_with(t);
            let w = partition.slot_members(s).len();
            if t.len() < w {
                return Err(EmbedError::Plan(format!("slot {s} has {w} pattern vertices but {} host vertices", t.len())));
            }
            if w > 0 && !(thetas[s] > 0.0 && thetas[s].is_finite()) {
                return Err(EmbedError::Plan(format!("slot {s} has theta {}", thetas[s])));
            }
        }
        thetas[top] = targets[top].len() as f64;
        Ok(EmbedPlan { partition, forward, targets, thetas, top })
    }

    pub fn host_n(&self) -> usize {
        self.targets[0].universe()
    }

    pub fn arity(&self) -> usize {
        self.forward.d_pad
    }

    pub fn padded(&self) -> bool {
        self.forward.d_pad > 0
    }

    /// Slots with at least one pattern vertex, excluding the top.
    pub fn lower_slots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.top).filter(|&s| !self.partition.slot_members(s).is_empty())
    }

    /// `max(1, max |V_i| / θ_i)` over the lower slots.
    pub fn gamma(&self) -> f64 {
        self.lower_slots()
            .map(|s| self.targets[s].len() as f64 / self.thetas[s])
            .fold(1.0, f64::max)
    }

    /// `Σ |W_i| / θ_i` over the lower slots.
    pub fn ratio_sum(&self) -> f64 {
        self.lower_slots().map(|s| self.partition.slot_members(s).len() as f64 / self.thetas[s]).sum()
    }

    /// Slots where `θ_i ≥ 2|W_i|` (or `|V_top| ≥ 2|W_top|`) fails.
    pub fn hypothesis_violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for s in 0..self.partition.slots() {
            let w = self.partition.slot_members(s).len();
            if w > 0 && self.thetas[s] < 2.0 * w as f64 {
                bad.push(format!("slot {s}: theta {} < 2|W| = {}", self.thetas[s], 2 * w));
            }
        }
        bad
    }

    /// Failure probability bound for this plan given the moment `μ_{4d}` of its product
    /// spaces, where `d` is the padded arity.
    pub fn failure_bound(&self, mu: f64) -> f64 {
        failure_bound_formula(self.arity(), self.gamma(), mu, self.ratio_sum())
    }
}

/// `2^{2d+2} γ^{2d} μ Σ`.
pub fn failure_bound_formula(d: usize, gamma: f64, mu: f64, ratio_sum: f64) -> f64 {
    if mu == 0.0 || ratio_sum == 0.0 {
        return 0.0;
    }
    let e = 2 * d as i32;
    2f64.powi(e + 2) * gamma.powi(e) * mu * ratio_sum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanMoment {
    /// Max over pattern vertices of the moment of their forward product space.
    #[serde(with = "ext_real")]
    pub value: f64,
    /// Same, with sampled values raised by three standard errors.
    #[serde(with = "ext_real")]
    pub upper: f64,
    pub sampled: bool,
    pub s: u32,
}

/// `max_x μ_{s,θ_x}(∏_{y ∈ N⁺(x)} V_{slot(y)}; V_{slot(x)})`. Dummy coordinates are
/// universal and drop out.
pub fn plan_moment(g: &Graph, plan: &EmbedPlan, s: u32, ev: &Evaluator, seed: u64) -> Result<PlanMoment, EmbedError> {
    let mut cache: HashMap<(usize, Vec<usize>), (f64, f64, bool)> = HashMap::new();
    let mut out = PlanMoment { value: 0.0, upper: 0.0, sampled: false, s };
    for x in 0..plan.partition.n {
        let sx = plan.partition.slot_of(x);
        let mut sig: Vec<usize> = plan.forward.forward[x].iter().map(|&y| plan.partition.slot_of(y)).collect();
        sig.sort_unstable();
        let key = (sx, sig);
        let entry = match cache.get(&key) {
            Some(&e) => e,
            None => {
                let theta = plan.thetas[sx];
                let target = &plan.targets[sx];
                let e = if key.1.is_empty() {
                    let w = defect_of_codegree(theta, target.len());
                    let v = if s == 0 { f64::from(u8::from(w != 0.0)) } else { w.powi(s as i32) };
                    (v, v, false)
                } else {
                    let factors: Vec<&VertexSet> = key.1.iter().map(|&t| &plan.targets[t]).collect();
                    let params = DefectParams::new(theta, s, factors.len())?;
                    let mseed = derive(seed, tag("plan-moment"), cache.len() as u64);
                    let m = ev.moment(g, &params, &factors, target, mseed)?;
                    let sampled = m.mode == EvalMode::Sampled;
                    (m.value, m.value + if sampled { 3.0 * m.std_error } else { 0.0 }, sampled)
                };
                cache.insert(key, e);
                e
            }
        };
        out.value = out.value.max(entry.0);
        out.upper = out.upper.max(entry.1);
        out.sampled |= entry.2;
    }
    Ok(out)
}

// ============================================================================
// The process
// ============================================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// Dummy pattern vertex mapped to a dummy host vertex.
    DummyMap,
    /// Top slot placed by a uniform injection (unpadded plans).
    Inject,
    /// Empty neighborhood: uniform vertex of the slot's host set.
    Empty,
    /// Fewer than half the neighborhood free: uniform vertex of the neighborhood.
    Collide,
    /// Uniform free neighbor.
    Free,
}

impl Step {
    pub fn is_clean(self) -> bool {
        matches!(self, Step::DummyMap | Step::Inject | Step::Free)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub vertex: usize,
    pub slot: usize,
    pub host: usize,
    pub step: Step,
    #[serde(with = "ext_real")]
    pub defect: f64,
    /// `|N(ψ(e_x); V)|`.
    pub neighborhood: usize,
    /// Free vertices in that neighborhood.
    pub available: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedState {
    /// Image of every pattern vertex followed by the dummies.
    pub map: Vec<Option<usize>>,
    pub used: VertexSet,
    /// `ω(x; ψ)` at placement time, per pattern vertex.
    #[serde(with = "ext_real_vec")]
    pub defects: Vec<f64>,
    /// `Σ ω^{2d}` per slot, `d` the padded arity.
    #[serde(with = "ext_real_vec")]
    pub lambda: Vec<f64>,
    pub log: Vec<Placement>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedFailure {
    pub vertex: usize,
    pub slot: usize,
    pub step: Step,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedRun {
    pub seed: u64,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<EmbedFailure>,
    pub state: EmbedState,
    /// `map` restricted to the pattern, on success.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<usize>>,
}

fn pick(rng: &mut Rng, set: &VertexSet) -> usize {
    set.nth(rng.gen_range(0..set.len())).expect("index below len")
}

/// Run the process to completion; the first non-clean placement is recorded as the
/// failure, but later vertices are still placed so the completed map can be inspected.
pub fn random_greedy_embed(g: &Graph, plan: &EmbedPlan, seed: u64) -> Result<EmbedRun, EmbedError> {
    if plan.host_n() != g.n() {
        return Err(EmbedError::Plan(format!("plan is for a host of {} vertices, got {}", plan.host_n(), g.n())));
    }
    let n = plan.partition.n;
    let d_pad = plan.arity();
    let power = 2 * d_pad as i32;
    let mut rng = stream(seed, tag("greedy-embed"), 0);
    let mut state = EmbedState {
        map: vec![None; n + d_pad],
        used: VertexSet::empty(g.n()),
        defects: vec![0.0; n],
        lambda: vec![0.0; plan.partition.slots()],
        log: Vec::with_capacity(n + d_pad),
    };
    let mut first_failure = None;

    let mut slots: Vec<usize> = (0..=plan.top).rev().collect();
    if plan.padded() {
        for p in 0..d_pad {
            let host = g.n() + rng.gen_range(0..d_pad);
            state.map[n + p] = Some(host);
            state.log.push(Placement {
                vertex: n + p,
                slot: plan.top,
                host,
                step: Step::DummyMap,
                defect: 0.0,
                neighborhood: 0,
                available: 0,
            });
        }
    } else {
        let members = plan.partition.slot_members(plan.top);
        let pool = plan.targets[plan.top].to_vec();
        for (&x, k) in members.iter().zip(sample(&mut rng, pool.len(), members.len()).into_iter()) {
            let host = pool[k];
            state.map[x] = Some(host);
            state.used.insert(host);
            state.log.push(Placement {
                vertex: x,
                slot: plan.top,
                host,
                step: Step::Inject,
                defect: 0.0,
                neighborhood: pool.len(),
                available: pool.len(),
            });
        }
        slots.remove(0);
    }

    let mut scratch = vec![0u64; g.words()];
    let mut tuple = Vec::with_capacity(d_pad);
    for slot in slots {
        let members = plan.partition.slot_members(slot);
        if members.is_empty() {
            continue;
        }
        let target = &plan.targets[slot];
        let theta = plan.thetas[slot];
        let image = |x: usize, tuple: &mut Vec<usize>, state: &EmbedState| {
            tuple.clear();
            tuple.extend(plan.forward.tuples[x].iter().map(|&y| state.map[y].expect("forward vertex placed")));
        };
        let mut order: Vec<(f64, usize)> = members
            .iter()
            .map(|&x| {
                image(x, &mut tuple, &state);
                let c = g.common_into(&tuple, target.words(), &mut scratch);
                (defect_of_codegree(theta, c), x)
            })
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (w, x) in order {
            image(x, &mut tuple, &state);
            g.common_into(&tuple, target.words(), &mut scratch);
            let nbhd = VertexSet::from_words(g.n(), scratch.clone());
            let free = nbhd.difference(&state.used);
            let (step, host) = if nbhd.is_empty() {
                (Step::Empty, pick(&mut rng, target))
            } else if 2 * free.len() < nbhd.len() {
                (Step::Collide, pick(&mut rng, &nbhd))
            } else {
                (Step::Free, pick(&mut rng, &free))
            };
            if !step.is_clean() && first_failure.is_none() {
                first_failure = Some(EmbedFailure { vertex: x, slot, step });
            }
            state.map[x] = Some(host);
            state.used.insert(host);
            state.defects[x] = w;
            state.lambda[slot] += if w == 0.0 { 0.0 } else { w.powi(power) };
            state.log.push(Placement {
                vertex: x,
                slot,
                host,
                step,
                defect: w,
                neighborhood: nbhd.len(),
                available: free.len(),
            });
        }
    }
    let success = first_failure.is_none();
    let embedding = success.then(|| state.map[..n].iter().map(|v| v.expect("all placed")).collect());
    Ok(EmbedRun { seed, success, first_failure, state, embedding })
}

// ============================================================================
// Certificate
// ============================================================================

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotCertificate {
    pub slot: usize,
    #[serde(with = "ext_real")]
    pub sum: f64,
    pub bound: f64,
    pub passed: bool,
    /// `θ ≥ 2|W|` for this slot.
    pub precondition: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub s: u32,
    pub slots: Vec<SlotCertificate>,
}

impl Certificate {
    pub fn all_passed(&self) -> bool {
        self.slots.iter().all(|c| c.passed)
    }

    pub fn preconditions_hold(&self) -> bool {
        self.slots.iter().all(|c| c.precondition)
    }
}

/// Per-slot test of `Σ_{x ∈ W} ω(x; ψ)^s ≤ θ / 2` on a completed run.
///
/// Panics if every slot passes with its precondition met while the run fired a
/// non-clean step.
pub fn certificate_check(state: &EmbedState, plan: &EmbedPlan, s: u32) -> Result<Certificate, EmbedError> {
    if s == 0 {
        return Err(EmbedError::Plan("certificate needs s >= 1".into()));
    }
    let mut slots = Vec::new();
    for slot in 0..=plan.top {
        let members = plan.partition.slot_members(slot);
        if members.is_empty() {
            continue;
        }
        let theta = plan.thetas[slot];
        let sum: f64 = members
            .iter()
            .map(|&x| state.defects[x])
            .map(|w| if w == 0.0 { 0.0 } else { w.powi(s as i32) })
            .sum();
        let bound = theta / 2.0;
        slots.push(SlotCertificate { slot, sum, bound, passed: sum <= bound, precondition: theta >= 2.0 * members.len() as f64 });
    }
    let cert = Certificate { s, slots };
    if cert.all_passed() && cert.preconditions_hold() {
        assert!(
            state.log.iter().all(|p| p.step.is_clean()),
            "certificate passed but the run fired a non-clean step"
        );
    }
    Ok(cert)
}

// ============================================================================
// Verification
// ============================================================================

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Violation {
    Length { got: usize, expected: usize },
    OutOfRange { vertex: usize, image: usize },
    NotInjective { a: usize, b: usize, image: usize },
    MissingEdge { u: usize, v: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

/// Is `map` an injective homomorphism of `h` into `g`?
pub fn verify_embedding(h: &Graph, g: &Graph, map: &[usize]) -> Verification {
    let fail = |v| Verification { ok: false, violation: Some(v) };
    if map.len() != h.n() {
        return fail(Violation::Length { got: map.len(), expected: h.n() });
    }
    let mut owner: HashMap<usize, usize> = HashMap::with_capacity(map.len());
    for (x, &y) in map.iter().enumerate() {
        if y >= g.n() {
            return fail(Violation::OutOfRange { vertex: x, image: y });
        }
        if let Some(&a) = owner.get(&y) {
            return fail(Violation::NotInjective { a, b: x, image: y });
        }
        owner.insert(y, x);
    }
    for (u, v) in h.edges() {
        if !g.has_edge(map[u], map[v]) {
            return fail(Violation::MissingEdge { u, v });
        }
    }
    Verification { ok: true, violation: None }
}

// ============================================================================
// One-side-bounded embedding
// ============================================================================

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneSideOutcome {
    pub success: bool,
    pub drc: DrcOutcome,
    pub injection_attempts: usize,
    /// `Σ_{v ∈ W1} ω(φ(e_v))` of the accepted (or best) injection.
    #[serde(with = "ext_real")]
    pub defect_sum: f64,
    /// Extension steps `i` with nonzero defect where `|N(φ(e_v))| < i`.
    pub feasibility_violations: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// `n^d / (n (n-1) ⋯ (n-d+1))`.
fn falling_ratio(n: usize, d: usize) -> f64 {
    (0..d).map(|i| n as f64 / (n - i) as f64).product()
}

/// Embed a bipartite pattern with sides `w1` (each vertex of degree at most `d` into
/// `w2`) and `w2` into the host pair `(v1, v2)`: `w2` goes into a dependent random
/// choice set of `v2`, then `w1` is placed greedily in `v1`.
#[allow(clippy::too_many_arguments)]
pub fn embed_one_side_bounded(
    g: &Graph,
    v1: &VertexSet,
    v2: &VertexSet,
    h: &Graph,
    w1: &[usize],
    w2: &[usize],
    eps: f64,
    p: &DrcParams,
    seed: u64,
) -> Result<OneSideOutcome, EmbedError> {
    g.check_set(v1)?;
    g.check_set(v2)?;
    let mut side = vec![None; h.n()];
    for (&v, sd) in w1.iter().map(|v| (v, 1)).chain(w2.iter().map(|v| (v, 2))) {
        h.check_vertex(v)?;
        if side[v].replace(sd).is_some() {
            return Err(EmbedError::Hypothesis(format!("pattern vertex {v} listed twice")));
        }
    }
    if side.iter().any(Option::is_none) {
        return Err(EmbedError::Hypothesis("w1 and w2 must cover the pattern".into()));
    }
    if let Some((u, v)) = h.edges().into_iter().find(|&(u, v)| side[u] == side[v]) {
        return Err(EmbedError::Hypothesis(format!("pattern edge {u}-{v} inside one side")));
    }
    if !v1.is_disjoint(v2) {
        return Err(EmbedError::Hypothesis("host sides overlap".into()));
    }
    if !(eps > 0.0) {
        return Err(EmbedError::Hypothesis("eps must be positive".into()));
    }
    let d = p.d;
    if let Some(&v) = w1.iter().find(|&&v| h.degree(v) > d) {
        return Err(EmbedError::Hypothesis(format!("pattern vertex {v} has degree {} > d = {d}", h.degree(v))));
    }
    let alpha = p.alpha;
    let (n1, n2) = (w1.len(), w2.len());
    if n2 < d {
        return Err(EmbedError::Hypothesis(format!("|W2| = {n2} < d = {d}")));
    }
    let need1 = (1.0 + eps) * alpha.powi(-(d as i32)) * n1 as f64;
    if (v1.len() as f64) < need1 {
        return Err(EmbedError::Hypothesis(format!("|V1| = {} < {need1}", v1.len())));
    }
    let need2 = ((1.0 + eps) / eps).powf(1.0 / d as f64) * alpha.powi(-2) * n2 as f64;
    if (v2.len() as f64) < need2 {
        return Err(EmbedError::Hypothesis(format!("|V2| = {} < {need2}", v2.len())));
    }
    let ratio = falling_ratio(n2, d);
    if ratio > 1.0 + eps {
        return Err(EmbedError::Hypothesis(format!("|W2|^d / falling factorial = {ratio} > 1 + eps")));
    }

    let theta = n1.max(1) as f64;
    let drc_params = DrcParams { d, s: 1, t: 2, eta: 1.0 / (1.0 + eps), eps: eps / (1.0 + eps), theta, ..p.clone() };
    let drc = drc_bipartite(g, v1, v2, &drc_params, derive(seed, tag("one-side-drc"), 0))?;
    let mut out = OneSideOutcome {
        success: false,
        drc,
        injection_attempts: 0,
        defect_sum: f64::INFINITY,
        feasibility_violations: Vec::new(),
        map: None,
        verification: None,
        failure: None,
    };
    if !out.drc.success {
        out.failure = Some("dependent random choice failed".into());
        return Ok(out);
    }
    let a = out.drc.sets[0].to_vec();
    if a.len() < n2 {
        out.failure = Some(format!("|A| = {} < |W2| = {n2}", a.len()));
        return Ok(out);
    }

    let ev = p.evaluator;
    let tuples: Vec<Vec<usize>> = w1.iter().map(|&v| h.neighbors(v).collect()).collect();
    let defects_for = |phi: &[usize]| -> Vec<f64> {
        let mut scratch = Vec::new();
        tuples
            .iter()
            .map(|e| {
                let img: Vec<usize> = e.iter().map(|&y| phi[y]).collect();
                defect_of_codegree(theta, g.codegree_scratch(&img, v1, &mut scratch))
            })
            .collect()
    };
    let attempt = |i: usize| {
        let mut rng = stream(seed, tag("one-side-inject"), i as u64);
        let mut phi = vec![usize::MAX; h.n()];
        for (&y, k) in w2.iter().zip(sample(&mut rng, a.len(), n2).into_iter()) {
            phi[y] = a[k];
        }
        let ws = defects_for(&phi);
        let sum: f64 = ws.iter().sum();
        if sum <= theta {
            Ok((phi, ws, sum))
        } else {
            Err(sum)
        }
    };
    let (phi, ws) = match ev.exec.find_first(p.max_restarts, attempt) {
        Ok((i, (phi, ws, sum))) => {
            out.injection_attempts = i + 1;
            out.defect_sum = sum;
            (phi, ws)
        }
        Err(sums) => {
            out.injection_attempts = sums.len();
            out.defect_sum = sums.into_iter().fold(f64::INFINITY, f64::min);
            out.failure = Some(format!("no injection with defect sum <= {theta}"));
            return Ok(out);
        }
    };

    let mut order: Vec<usize> = (0..n1).collect();
    order.sort_by(|&i, &j| ws[j].total_cmp(&ws[i]).then(w1[i].cmp(&w1[j])));
    let mut rng = stream(seed, tag("one-side-extend"), 0);
    let mut map = phi;
    let mut used = VertexSet::empty(g.n());
    for (step, &k) in order.iter().enumerate() {
        let img: Vec<usize> = tuples[k].iter().map(|&y| map[y]).collect();
        let nb = crate::graph::common_neighbors(g, &img, v1)?;
        if ws[k] != 0.0 && nb.len() < step + 1 {
            out.feasibility_violations.push(step + 1);
        }
        let free = nb.difference(&used);
        if free.is_empty() {
            out.failure = Some(format!("no free candidate for pattern vertex {}", w1[k]));
            return Ok(out);
        }
        let host = pick(&mut rng, &free);
        map[w1[k]] = host;
        used.insert(host);
    }
    let ver = verify_embedding(h, g, &map);
    out.success = ver.ok;
    if !ver.ok {
        out.failure = Some(format!("verification failed: {:?}", ver.violation));
    }
    out.verification = Some(ver);
    out.map = Some(map);
    Ok(out)
}
