//! Dependent random choice.
//!
//! Each operation draws a random tuple `X` (with repetition) from one set and keeps the
//! common neighborhood `N(X)` inside another, then measures the guarantees it needs.
//! Draws that fail a measured guarantee are discarded and redrawn, up to
//! `max_restarts`; the accepted draw is always the lowest-indexed passing one, so results
//! do not depend on how many draws are evaluated concurrently.
//!
//! Failure is reported as data: a [`DrcOutcome`] with `success == false` still carries
//! the sets and checks of the best attempt seen.

use crate::defect::{DefectError, DefectParams, Evaluator};
use crate::exec::Exec;
use crate::graph::{Color, Graph, GraphError, TwoColoring, VertexSet};
use crate::report::{all_passed, first_failure, Check};
use crate::rng::{derive, stream, tag, Rng};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DrcError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Defect(#[from] DefectError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DrcParams {
    pub d: usize,
    pub s: u32,
    pub t: usize,
    pub eta: f64,
    pub eps: f64,
    pub alpha: f64,
    pub xi: f64,
    pub theta: f64,
    pub max_restarts: usize,
    /// Replaces the per-round tuple lengths `t_0, …, t_r` of [`drc_mutual`].
    pub rounds: Option<Vec<usize>>,
    pub evaluator: Evaluator,
}

impl Default for DrcParams {
    fn default() -> Self {
        DrcParams {
            d: 2,
            s: 1,
            t: 2,
            eta: 0.25,
            eps: 0.5,
            alpha: 0.5,
            xi: 0.1,
            theta: 1.0,
            max_restarts: 100,
            rounds: None,
            evaluator: Evaluator::default(),
        }
    }
}

impl DrcParams {
    fn validate(&self) -> Result<(), DrcError> {
        let bad = |m: &str| Err(DrcError::BadParams(m.to_string()));
        if self.d == 0 {
            return bad("d must be at least 1");
        }
        if (self.t as u64) < self.s as u64 {
            return bad("t must be at least s");
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return bad("theta must be positive and finite");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.eta > 0.0) {
            return bad("eta must be positive");
        }
        if self.max_restarts == 0 {
            return bad("max_restarts must be at least 1");
        }
        Ok(())
    }

    fn exec(&self) -> Exec {
        self.evaluator.exec
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrcOp {
    Bipartite,
    General,
    Pair,
    Chain,
    Mutual,
}

/// One restart loop: how many draws it used, which one was kept and what was measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrcStage {
    pub name: String,
    pub attempts: usize,
    /// Index of the accepted draw; `None` if every draw failed (the record is then the
    /// best failing draw).
    pub accepted: Option<usize>,
    pub witness: Vec<Vec<usize>>,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrcOutcome {
    pub op: DrcOp,
    pub success: bool,
    pub color: Option<Color>,
    pub sets: Vec<VertexSet>,
    pub stages: Vec<DrcStage>,
    /// Closing checks on the returned sets (chain and mutual).
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ChainSchedule>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl DrcOutcome {
    fn new(op: DrcOp, seed: u64) -> Self {
        DrcOutcome {
            op,
            success: false,
            color: None,
            sets: Vec::new(),
            stages: Vec::new(),
            checks: Vec::new(),
            schedule: None,
            seed,
            failure: None,
        }
    }

    /// Every recorded check, stage by stage, then the closing checks.
    pub fn all_checks(&self) -> impl Iterator<Item = &Check> {
        self.stages.iter().flat_map(|s| s.checks.iter()).chain(self.checks.iter())
    }
}

/// Tuple lengths and thresholds for the refinement rounds of [`drc_mutual`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSchedule {
    /// `t_0, …, t_r`.
    pub t: Vec<usize>,
    /// `d_i = d + Σ_{j > i} t_j` for `i = 0..=r`.
    pub d: Vec<usize>,
    pub theta0: f64,
    pub theta1: f64,
    pub overridden: bool,
}

impl ChainSchedule {
    /// `t_i = 8^{r+1-i} (d + t)`; saturates for large `r`.
    pub fn standard(d: usize, t: usize, r: usize, xi: f64, m: usize) -> Self {
        let ts = (0..=r)
            .map(|i| 8usize.saturating_pow((r + 1 - i) as u32).saturating_mul(d + t))
            .collect();
        Self::from_rounds(d, ts, xi, m, false)
    }

    pub fn from_rounds(d: usize, t: Vec<usize>, xi: f64, m: usize, overridden: bool) -> Self {
        let r = t.len() - 1;
        let mut ds = vec![d; r + 1];
        for i in (0..r).rev() {
            ds[i] = ds[i + 1].saturating_add(t[i + 1]);
        }
        ChainSchedule { t, d: ds, theta0: xi * m as f64, theta1: xi * xi * m as f64, overridden }
    }

    pub fn rounds(&self) -> usize {
        self.t.len() - 1
    }

    /// Rounds `i ∈ [1, r-1]` where `t_i / 6 ≥ d_i ≥ t_{i+1}` fails.
    pub fn violations(&self) -> Vec<usize> {
        (1..self.rounds())
            .filter(|&i| !(self.t[i] as f64 / 6.0 >= self.d[i] as f64 && self.d[i] >= self.t[i + 1]))
            .collect()
    }
}

// ============================================================================
// Shared machinery
// ============================================================================

pub(crate) fn draw(rng: &mut Rng, pool: &[usize], t: usize) -> Vec<usize> {
    (0..t).map(|_| pool[rng.gen_range(0..pool.len())]).collect()
}

/// `N(x; within)`.
fn neighborhood(g: &Graph, x: &[usize], within: &VertexSet) -> VertexSet {
    let mut out = within.clone();
    for &v in x {
        out.intersect_with(&g.neighbor_set(v));
    }
    out
}

pub(crate) fn union_except(sets: &[VertexSet], skip: usize) -> VertexSet {
    let mut u = VertexSet::empty(sets[0].universe());
    for (j, s) in sets.iter().enumerate() {
        if j != skip {
            u.union_with(s);
        }
    }
    u
}

/// `μ_{s,θ}(factor^arity; target) ≤ bound`, or a failing check when the product set is
/// empty and the moment is undefined.
#[allow(clippy::too_many_arguments)]
pub(crate) fn moment_check(
    name: impl Into<String>,
    g: &Graph,
    ev: &Evaluator,
    theta: f64,
    s: u32,
    factor: &VertexSet,
    arity: usize,
    target: &VertexSet,
    bound: f64,
    seed: u64,
) -> Result<Check, DrcError> {
    let name = name.into();
    if factor.is_empty() {
        return Ok(Check::at_least(format!("{name}: nonempty factor"), 0.0, 1.0));
    }
    let params = DefectParams::new(theta, s, arity)?;
    let factors = vec![factor; arity];
    let m = ev.moment(g, &params, &factors, target, seed)?;
    Ok(Check::moment_at_most(name, &m, bound, seed))
}

pub(crate) struct Attempt<T> {
    pub(crate) witness: Vec<Vec<usize>>,
    pub(crate) checks: Vec<Check>,
    pub(crate) payload: T,
}

pub(crate) struct Loop<T> {
    pub(crate) accepted: Option<usize>,
    pub(crate) attempts: usize,
    pub(crate) best: Attempt<T>,
}

/// Evaluate draws until one passes all its checks; otherwise keep the draw with the most
/// passing checks (lowest index on ties).
pub(crate) fn las_vegas<T, F>(exec: Exec, max: usize, attempt: F) -> Result<Loop<T>, DrcError>
where
    T: Send,
    F: Fn(usize) -> Result<Attempt<T>, DrcError> + Sync + Send,
{
    let res = exec.find_first(max, |i| match attempt(i) {
        Ok(a) if all_passed(&a.checks) => Ok(Ok(a)),
        Ok(a) => Err(Ok(a)),
        Err(e) => Err(Err(e)),
    });
    match res {
        Ok((i, Ok(a))) => Ok(Loop { accepted: Some(i), attempts: i + 1, best: a }),
        Ok((_, Err(e))) => Err(e),
        Err(fails) => {
            let mut best: Option<Attempt<T>> = None;
            for f in fails {
                let a = f?;
                let score = a.checks.iter().filter(|c| c.passed).count();
                if best.as_ref().map_or(true, |b| score > b.checks.iter().filter(|c| c.passed).count()) {
                    best = Some(a);
                }
            }
            Ok(Loop { accepted: None, attempts: max, best: best.expect("max_restarts >= 1") })
        }
    }
}

fn stage_record<T>(name: impl Into<String>, l: &Loop<T>) -> DrcStage {
    DrcStage {
        name: name.into(),
        attempts: l.attempts,
        accepted: l.accepted,
        witness: l.best.witness.clone(),
        checks: l.best.checks.clone(),
    }
}

fn check_universe(g: &Graph, sets: &[&VertexSet]) -> Result<(), DrcError> {
    for s in sets {
        g.check_set(s)?;
    }
    Ok(())
}

/// One DRC draw `A = N(X; v2)`, `X ∈ v1^t`, with size and moment bounds.
struct SingleDraw<'a> {
    g: &'a Graph,
    v1: &'a VertexSet,
    v2: &'a VertexSet,
    pool: Vec<usize>,
    t: usize,
    theta: f64,
    s: u32,
    arity: usize,
    size_bound: f64,
    moment_bound: f64,
    ev: Evaluator,
    seed: u64,
    label: u64,
}

impl SingleDraw<'_> {
    fn attempt(&self, i: usize) -> Result<Attempt<VertexSet>, DrcError> {
        let mut rng = stream(self.seed, self.label, i as u64);
        if self.pool.is_empty() && self.t > 0 {
            let a = VertexSet::empty(self.v2.universe());
            let checks = vec![Check::at_least("|A|", 0.0, self.size_bound)];
            return Ok(Attempt { witness: vec![vec![]], checks, payload: a });
        }
        let x = draw(&mut rng, &self.pool, self.t);
        let a = neighborhood(self.g, &x, self.v2);
        let mut checks = vec![Check::at_least("|A|", a.len() as f64, self.size_bound)];
        if checks[0].passed {
            let mseed = derive(self.seed, self.label ^ tag("moment"), i as u64);
            checks.push(moment_check(
                "mu(A^d; V1)",
                self.g,
                &self.ev,
                self.theta,
                self.s,
                &a,
                self.arity,
                self.v1,
                self.moment_bound,
                mseed,
            )?);
        }
        Ok(Attempt { witness: vec![x], checks, payload: a })
    }

    fn run(&self, max: usize, exec: Exec) -> Result<Loop<VertexSet>, DrcError> {
        las_vegas(exec, max, |i| self.attempt(i))
    }
}

fn theta_fits(theta: f64, cap: f64) -> bool {
    theta <= cap * (1.0 + 1e-12)
}

// ============================================================================
// Single-set forms
// ============================================================================

/// Bipartite DRC: `A = N(X; v2)` for `X ∈ v1^t`, accepted when
/// `|A| ≥ ε^{1/d} α^t |v2|` and `μ_{s,θ}(A^d; v1) ≤ η^t / (1 − ε)`.
pub fn drc_bipartite(g: &Graph, v1: &VertexSet, v2: &VertexSet, p: &DrcParams, seed: u64) -> Result<DrcOutcome, DrcError> {
    p.validate()?;
    check_universe(g, &[v1, v2])?;
    if !(p.eps > 0.0 && p.eps < 1.0) {
        return Err(DrcError::BadParams("eps must lie in (0, 1)".into()));
    }
    if v1.is_empty() || v2.is_empty() {
        return Err(DrcError::Precondition("both sides must be nonempty".into()));
    }
    let cap = p.eta * p.alpha.powi(p.d as i32) * v1.len() as f64;
    if !theta_fits(p.theta, cap) {
        return Err(DrcError::Precondition(format!("theta {} exceeds eta*alpha^d*|V1| = {cap}", p.theta)));
    }
    let job = SingleDraw {
        g,
        v1,
        v2,
        pool: v1.to_vec(),
        t: p.t,
        theta: p.theta,
        s: p.s,
        arity: p.d,
        size_bound: p.eps.powf(1.0 / p.d as f64) * p.alpha.powi(p.t as i32) * v2.len() as f64,
        moment_bound: p.eta.powi(p.t as i32) / (1.0 - p.eps),
        ev: p.evaluator,
        seed,
        label: tag("drc-bipartite"),
    };
    let l = job.run(p.max_restarts, p.exec())?;
    Ok(single_outcome(DrcOp::Bipartite, seed, l))
}

fn single_outcome(op: DrcOp, seed: u64, l: Loop<VertexSet>) -> DrcOutcome {
    let mut out = DrcOutcome::new(op, seed);
    out.stages.push(stage_record("draw", &l));
    out.success = l.accepted.is_some();
    if !out.success {
        out.failure = Some(format!("no draw passed within {} restarts", l.attempts));
    }
    out.sets.push(l.best.payload);
    out
}

/// General DRC between possibly overlapping sets: requires `e(v1, v2) ≥ α|v1||v2|`
/// (ordered pairs) and accepts `|A| ≥ ½ α^t |v2|`, `μ_{s,θ}(A^d; v1) ≤ 2η^t`.
pub fn drc_general(g: &Graph, v1: &VertexSet, v2: &VertexSet, p: &DrcParams, seed: u64) -> Result<DrcOutcome, DrcError> {
    p.validate()?;
    check_universe(g, &[v1, v2])?;
    if v1.is_empty() || v2.is_empty() {
        return Err(DrcError::Precondition("both sides must be nonempty".into()));
    }
    let pairs = g.edges_between(v1, v2) as f64;
    let need = p.alpha * v1.len() as f64 * v2.len() as f64;
    if pairs < need {
        return Err(DrcError::Precondition(format!("e(V1,V2) = {pairs} < alpha*|V1|*|V2| = {need}")));
    }
    let cap = p.eta * p.alpha.powi(p.d as i32) * v1.len() as f64;
    if !theta_fits(p.theta, cap) {
        return Err(DrcError::Precondition(format!("theta {} exceeds eta*alpha^d*|V1| = {cap}", p.theta)));
    }
    let job = general_job(g, v1, v2, p, p.d, 0.5 * p.alpha.powi(p.t as i32) * v2.len() as f64, seed, tag("drc-general"));
    let l = job.run(p.max_restarts, p.exec())?;
    Ok(single_outcome(DrcOp::General, seed, l))
}

#[allow(clippy::too_many_arguments)]
fn general_job<'a>(
    g: &'a Graph,
    v1: &'a VertexSet,
    v2: &'a VertexSet,
    p: &DrcParams,
    arity: usize,
    size_bound: f64,
    seed: u64,
    label: u64,
) -> SingleDraw<'a> {
    SingleDraw {
        g,
        v1,
        v2,
        pool: v1.to_vec(),
        t: p.t,
        theta: p.theta,
        s: p.s,
        arity,
        size_bound,
        moment_bound: 2.0 * p.eta.powi(p.t as i32),
        ev: p.evaluator,
        seed,
        label,
    }
}

/// Re-derive a single-set outcome from its witness: recompute `A = N(X; v2)` and every
/// recorded check with the recorded sampling seeds.
pub fn reverify_single(g: &Graph, v1: &VertexSet, v2: &VertexSet, p: &DrcParams, out: &DrcOutcome) -> Result<bool, DrcError> {
    let stage = out.stages.first().ok_or_else(|| DrcError::BadParams("outcome has no stages".into()))?;
    let x = stage.witness.first().cloned().unwrap_or_default();
    let a = neighborhood(g, &x, v2);
    if out.sets.first() != Some(&a) {
        return Ok(false);
    }
    for c in &stage.checks {
        let again = if c.name == "|A|" {
            Check::at_least("|A|", a.len() as f64, c.bound)
        } else {
            let seed = c.seed.unwrap_or(0);
            moment_check(c.name.clone(), g, &p.evaluator, p.theta, p.s, &a, p.d, v1, c.bound, seed)?
        };
        if again.measured.to_bits() != c.measured.to_bits() || again.passed != c.passed {
            return Ok(false);
        }
    }
    Ok(true)
}

// ============================================================================
// Defect transfer
// ============================================================================

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub trials: usize,
    /// Mean of `μ_{s,θ}(a2^d; N(X; v1))` over uniform `X ∈ a2^t`.
    #[serde(with = "crate::real::ext_real")]
    pub empirical_mean: f64,
    #[serde(with = "crate::real::ext_real")]
    pub std_error: f64,
    /// `μ_{s,θ}(a2^{d+t}; v1)`, exact.
    #[serde(with = "crate::real::ext_real")]
    pub exact: f64,
    #[serde(with = "crate::real::ext_real")]
    pub gap: f64,
    /// Trials whose left-hand side was infinite.
    pub infinite_trials: usize,
}

impl TransferReport {
    /// `|gap| ≤ sigmas · std_error` (with a tiny relative slack for rounding).
    pub fn within(&self, sigmas: f64) -> bool {
        if self.exact.is_infinite() || self.empirical_mean.is_infinite() {
            return self.exact == self.empirical_mean;
        }
        self.gap.abs() <= sigmas * self.std_error + 1e-12 * self.exact.abs().max(1.0)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn defect_transfer_check(
    g: &Graph,
    a2: &VertexSet,
    v1: &VertexSet,
    d: usize,
    t: usize,
    s: u32,
    theta: f64,
    trials: usize,
    seed: u64,
    ev: &Evaluator,
) -> Result<TransferReport, DrcError> {
    check_universe(g, &[a2, v1])?;
    if a2.is_empty() {
        return Err(DrcError::Precondition("a2 must be nonempty".into()));
    }
    if trials == 0 {
        return Err(DrcError::BadParams("trials must be at least 1".into()));
    }
    let rhs_params = DefectParams::new(theta, s, d + t)?;
    let exact = ev.moment_exact(g, &rhs_params, &vec![a2; d + t], v1)?.value;

    let lhs_params = DefectParams::new(theta, s, d)?;
    let pool = a2.to_vec();
    let inner = ev.with_exec(Exec::Sequential);
    let values = ev.exec.map(trials, |i| {
        let mut rng = stream(seed, tag("defect-transfer"), i as u64);
        let x = draw(&mut rng, &pool, t);
        let a1 = neighborhood(g, &x, v1);
        inner.moment_exact(g, &lhs_params, &vec![a2; d], &a1).map(|m| m.value)
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_, _>>()?;
    let infinite_trials = values.iter().filter(|v| v.is_infinite()).count();
    let n = trials as f64;
    let (mean, se) = if infinite_trials > 0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let mean = values.iter().sum::<f64>() / n;
        let var = if trials > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { f64::INFINITY };
        (mean, (var / n).sqrt())
    };
    Ok(TransferReport { trials, empirical_mean: mean, std_error: se, exact, gap: mean - exact, infinite_trials })
}

// ============================================================================
// Pair
// ============================================================================

/// Two-sided DRC on a bipartite pair of equal size `m`. Each attempt draws
/// `A2 = N(X; v2)` with `X ∈ v1^t` (checked as a general draw at arity `d + t`) and then
/// `A1 = N(Y; v1)` with `Y ∈ A2^t`; it is accepted when `|A_i| ≥ ¼ α^t m` and both
/// cross moments are at most `2η^{t/2}`.
pub fn drc_pair(g: &Graph, v1: &VertexSet, v2: &VertexSet, p: &DrcParams, seed: u64) -> Result<DrcOutcome, DrcError> {
    p.validate()?;
    check_universe(g, &[v1, v2])?;
    let m = v1.len();
    if m == 0 || v2.len() != m {
        return Err(DrcError::Precondition(format!("sides must be nonempty and equal, got {} and {}", m, v2.len())));
    }
    let min_deg = v1
        .iter()
        .map(|u| g.degree_into(u, v2))
        .chain(v2.iter().map(|u| g.degree_into(u, v1)))
        .min()
        .unwrap();
    if (min_deg as f64) < p.alpha * m as f64 {
        return Err(DrcError::Precondition(format!("minimum cross degree {min_deg} < alpha*m = {}", p.alpha * m as f64)));
    }
    let eta_cap = p.alpha.powi(2 * p.d as i32) / 16.0;
    if p.eta > eta_cap * (1.0 + 1e-12) {
        return Err(DrcError::Precondition(format!("eta {} exceeds alpha^(2d)/16 = {eta_cap}", p.eta)));
    }
    let theta_cap = 0.5 * p.eta * p.alpha.powi((p.d + p.t) as i32) * m as f64;
    if !theta_fits(p.theta, theta_cap) {
        return Err(DrcError::Precondition(format!("theta {} exceeds eta*alpha^(d+t)*m/2 = {theta_cap}", p.theta)));
    }
    let (out, _) = pair_core(g, v1, v2, p, seed)?;
    Ok(out)
}

/// [`drc_pair`] without the precondition checks, for callers running at parameters the
/// preconditions do not cover.
pub(crate) fn pair_core(g: &Graph, v1: &VertexSet, v2: &VertexSet, p: &DrcParams, seed: u64) -> Result<(DrcOutcome, ()), DrcError> {
    let m = v1.len();
    let size_bound = 0.25 * p.alpha.powi(p.t as i32) * m as f64;
    let cross_bound = 2.0 * p.eta.powf(p.t as f64 / 2.0);
    let stage1_size = 0.5 * p.alpha.powi(p.t as i32) * m as f64;
    let label = tag("drc-pair");
    let pool1 = v1.to_vec();
    let ev = p.evaluator;
    let l = las_vegas(p.exec(), p.max_restarts, |i| {
        let mut rng = stream(seed, label, i as u64);
        let mseed = |k: u64| derive(seed, label ^ tag("moment"), (i as u64) << 3 | k);
        let x = draw(&mut rng, &pool1, p.t);
        let a2 = neighborhood(g, &x, v2);
        let mut checks = vec![Check::at_least("stage1 |A2|", a2.len() as f64, stage1_size)];
        if !checks[0].passed || a2.is_empty() {
            return Ok(Attempt { witness: vec![x], checks, payload: (VertexSet::empty(g.n()), a2) });
        }
        checks.push(moment_check(
            "stage1 mu(A2^(d+t); V1)",
            g,
            &ev,
            p.theta,
            p.s,
            &a2,
            p.d + p.t,
            v1,
            2.0 * p.eta.powi(p.t as i32),
            mseed(0),
        )?);
        let pool2 = a2.to_vec();
        let y = draw(&mut rng, &pool2, p.t);
        let a1 = neighborhood(g, &y, v1);
        checks.push(Check::at_least("|A1|", a1.len() as f64, size_bound));
        checks.push(Check::at_least("|A2|", a2.len() as f64, size_bound));
        if a1.is_empty() {
            return Ok(Attempt { witness: vec![x, y], checks, payload: (a1, a2) });
        }
        checks.push(moment_check("mu(A1^d; A2)", g, &ev, p.theta, p.s, &a1, p.d, &a2, cross_bound, mseed(1))?);
        checks.push(moment_check("mu(A2^d; A1)", g, &ev, p.theta, p.s, &a2, p.d, &a1, cross_bound, mseed(2))?);
        Ok(Attempt { witness: vec![x, y], checks, payload: (a1, a2) })
    })?;
    let mut out = DrcOutcome::new(DrcOp::Pair, seed);
    out.stages.push(stage_record("pair", &l));
    out.success = l.accepted.is_some();
    if !out.success {
        out.failure = Some(format!(
            "no draw passed within {} restarts (best failed at {})",
            l.attempts,
            first_failure(&l.best.checks).unwrap_or("?")
        ));
    }
    let (a1, a2) = l.best.payload;
    out.sets = vec![a1, a2];
    Ok((out, ()))
}

// ============================================================================
// Chain
// ============================================================================

/// Color with at least half of the pairs inside `a` (red on ties), and its ordered-pair
/// density `2 e_c(a) / |a|^2`.
fn majority_color(coloring: &TwoColoring, a: &VertexSet) -> (Color, f64) {
    let red_pairs = coloring.red().edges_between(a, a);
    let n = a.len() as u64;
    let all_pairs = n * n.saturating_sub(1);
    let blue_pairs = all_pairs - red_pairs;
    let denom = (n * n).max(1) as f64;
    if red_pairs >= blue_pairs {
        (Color::Red, red_pairs as f64 / denom)
    } else {
        (Color::Blue, blue_pairs as f64 / denom)
    }
}

struct ChainSpec {
    r: usize,
    d: usize,
    s: u32,
    t: usize,
    eta: f64,
    theta: f64,
}

/// Nested sets `A_1 ⊆ … ⊆ A_r` in one color, with `μ_{s,θ}(A_j^d; A_{j+1}) ≤ 2η^t`.
pub fn drc_chain(coloring: &TwoColoring, r: usize, p: &DrcParams, seed: u64) -> Result<DrcOutcome, DrcError> {
    p.validate()?;
    if r == 0 {
        return Err(DrcError::BadParams("r must be at least 1".into()));
    }
    let m = coloring.m();
    if m == 0 {
        return Err(DrcError::Precondition("empty host".into()));
    }
    if r == 1 {
        let all = VertexSet::full(m);
        let (color, _) = majority_color(coloring, &all);
        let g = coloring.color_graph(color);
        let job = general_job(&g, &all, &all, p, p.d, 0.5 * p.alpha.powi(p.t as i32) * m as f64, seed, tag("drc-chain-1"));
        let l = job.run(p.max_restarts, p.exec())?;
        let mut out = single_outcome(DrcOp::Chain, seed, l);
        out.color = Some(color);
        return Ok(out);
    }
    let exp = p.d as f64 + 2.0 * (p.t as f64 + 1.0) * (r as f64 - 1.0);
    let cap = p.eta * 2f64.powf(-exp) * m as f64;
    if !theta_fits(p.theta, cap) {
        return Err(DrcError::Precondition(format!("theta {} exceeds eta*2^-(d+2(t+1)(r-1))*m = {cap}", p.theta)));
    }
    let spec = ChainSpec { r, d: p.d, s: p.s, t: p.t, eta: p.eta, theta: p.theta };
    chain_core(coloring, &spec, p, seed)
}

fn chain_core(coloring: &TwoColoring, spec: &ChainSpec, p: &DrcParams, seed: u64) -> Result<DrcOutcome, DrcError> {
    let m = coloring.m();
    let r = spec.r;
    let mut out = DrcOutcome::new(DrcOp::Chain, seed);
    let steps = 2 * (r - 1);
    let mut sets: Vec<VertexSet> = vec![VertexSet::full(m); steps + 1];
    let mut colors: Vec<Color> = vec![Color::Red; steps + 1];
    let mut graphs: [Option<Graph>; 2] = [None, None];
    let step_params = DrcParams { d: spec.d, s: spec.s, t: spec.t, eta: spec.eta, theta: spec.theta, ..p.clone() };

    for i in (1..=steps).rev() {
        let (c, _) = majority_color(coloring, &sets[i]);
        if i == steps {
            colors[i] = c;
        }
        let g = graphs[c as usize].get_or_insert_with(|| coloring.color_graph(c));
        let size_bound = 2f64.powi(-(spec.t as i32) - 1) * sets[i].len() as f64;
        let job = general_job(g, &sets[i], &sets[i], &step_params, spec.d, size_bound, seed, tag("drc-chain") ^ i as u64);
        let l = job.run(p.max_restarts, p.exec())?;
        out.stages.push(stage_record(format!("step {}", steps + 1 - i), &l));
        if l.accepted.is_none() && out.failure.is_none() {
            out.failure = Some(format!("step {} exhausted {} restarts", steps + 1 - i, l.attempts));
        }
        sets[i - 1] = l.best.payload;
        colors[i - 1] = c;
    }

    let reds = colors.iter().filter(|&&c| c == Color::Red).count();
    let color = if reds >= r { Color::Red } else { Color::Blue };
    let mut chosen: Vec<usize> = (0..=steps).filter(|&i| colors[i] == color).collect();
    chosen.drain(..chosen.len() - r);
    let g = graphs[color as usize].get_or_insert_with(|| coloring.color_graph(color));
    let floor = 2f64.powf(-2.0 * (spec.t as f64 + 1.0) * (r as f64 - 1.0)) * m as f64;
    let bound = 2.0 * spec.eta.powi(spec.t as i32);
    for (a, &i) in chosen.iter().enumerate() {
        out.checks.push(Check::at_least(format!("|A_{}|", a + 1), sets[i].len() as f64, floor));
    }
    for a in 0..r - 1 {
        let (lo, hi) = (&sets[chosen[a]], &sets[chosen[a + 1]]);
        let mseed = derive(seed, tag("drc-chain-final"), a as u64);
        out.checks.push(moment_check(
            format!("mu(A_{}^d; A_{})", a + 1, a + 2),
            g,
            &p.evaluator,
            spec.theta,
            spec.s,
            lo,
            spec.d,
            hi,
            bound,
            mseed,
        )?);
    }
    out.color = Some(color);
    out.sets = chosen.iter().map(|&i| sets[i].clone()).collect();
    out.success = out.failure.is_none() && all_passed(&out.checks);
    if out.failure.is_none() && !out.success {
        out.failure = first_failure(&out.checks).map(|s| format!("final check {s}"));
    }
    Ok(out)
}

// ============================================================================
// Mutual
// ============================================================================

/// `r` sets in one color with `|A_j| ≥ θ` and `μ_{s,θ}(A_{-j}^d; A_j) ≤ ξ^t`, built from
/// a chain (run with `s = 0` at arity `d_0`, tuple length `t_0`, threshold `θ_0 = ξm`)
/// followed by `r` refinement rounds. Round `i` draws `X ∈ A_i^{t_i}` and shrinks every
/// other set to its common neighborhood with `X`; it is accepted when four measured
/// events hold (sizes, chain zero-moments, mutual moments, and the budget on
/// `μ_{s,θ_1}(A_{-i}^{d_i}; B_i)`).
pub fn drc_mutual(coloring: &TwoColoring, r: usize, p: &DrcParams, seed: u64) -> Result<DrcOutcome, DrcError> {
    p.validate()?;
    if r == 0 {
        return Err(DrcError::BadParams("r must be at least 1".into()));
    }
    let m = coloring.m();
    if !(p.xi > 0.0 && p.xi <= 1.0) {
        return Err(DrcError::BadParams("xi must lie in (0, 1]".into()));
    }
    if p.theta > m as f64 {
        return Err(DrcError::Precondition(format!("theta {} exceeds m = {m}", p.theta)));
    }
    let theta1 = p.xi * p.xi * m as f64;
    if !theta_fits(p.theta, theta1) {
        return Err(DrcError::Precondition(format!("theta {} exceeds xi^2*m = {theta1}", p.theta)));
    }
    let schedule = match &p.rounds {
        Some(ts) if ts.len() == r + 1 => ChainSchedule::from_rounds(p.d, ts.clone(), p.xi, m, true),
        Some(ts) => {
            return Err(DrcError::BadParams(format!("rounds must list t_0..t_r ({} values), got {}", r + 1, ts.len())))
        }
        None => ChainSchedule::standard(p.d, p.t, r, p.xi, m),
    };
    mutual_core(coloring, r, p, &schedule, seed)
}

fn mutual_core(coloring: &TwoColoring, r: usize, p: &DrcParams, sch: &ChainSchedule, seed: u64) -> Result<DrcOutcome, DrcError> {
    let m = coloring.m();
    let spec = ChainSpec { r, d: sch.d[0], s: 0, t: sch.t[0], eta: p.eta, theta: sch.theta0 };
    let chain = chain_core(coloring, &spec, p, derive(seed, tag("mutual-chain"), 0))?;
    let color = chain.color.expect("chain picks a color");
    let g = coloring.color_graph(color);
    let mut out = DrcOutcome::new(DrcOp::Mutual, seed);
    out.color = Some(color);
    out.schedule = Some(sch.clone());
    for mut st in chain.stages {
        st.name = format!("chain {}", st.name);
        out.stages.push(st);
    }
    out.checks.extend(chain.checks.iter().cloned().map(|mut c| {
        c.name = format!("chain {}", c.name);
        c
    }));
    if let Some(f) = &chain.failure {
        out.failure = Some(format!("chain: {f}"));
    }
    let mut sets = chain.sets;
    let ev = p.evaluator;
    let rf = r as f64;

    for i in 0..r {
        let (t_i, d_i, t_prev) = (sch.t[i + 1], sch.d[i + 1], sch.t[i]);
        let slack = 4.0 * rf * p.xi.powf(t_prev as f64 / 4.0);
        let label = tag("drc-mutual-round") ^ i as u64;
        let b = &sets;
        let pool = b[i].to_vec();
        let b_minus_i = if r > 1 { union_except(b, i) } else { VertexSet::empty(m) };
        let l = las_vegas(p.exec(), p.max_restarts, |a| {
            let mut rng = stream(seed, label, a as u64);
            let mseed = |k: u64| derive(seed, label ^ tag("moment"), (a as u64) << 8 | k);
            let x = if pool.is_empty() { Vec::new() } else { draw(&mut rng, &pool, t_i) };
            let mut next: Vec<VertexSet> = b.clone();
            for (j, s) in next.iter_mut().enumerate() {
                if j != i {
                    *s = neighborhood(&g, &x, s);
                }
            }
            let mut checks = Vec::new();
            // Event 1: sizes.
            for (j, s) in next.iter().enumerate() {
                let floor = if j >= i { sch.theta0 } else { sch.theta1 };
                checks.push(Check::at_least(format!("E1 |A_{}|", j + 1), s.len() as f64, floor));
            }
            if !all_passed(&checks) {
                return Ok(Attempt { witness: vec![x], checks, payload: next });
            }
            // Event 2: zero-moments along the chain.
            for j in i..r.saturating_sub(1) {
                checks.push(moment_check(
                    format!("E2 mu0(B_{}^d; A_{})", j + 1, j + 2),
                    &g,
                    &ev,
                    sch.theta0,
                    0,
                    &b[j],
                    d_i,
                    &next[j + 1],
                    slack,
                    mseed(j as u64),
                )?);
            }
            // Event 3: mutual moments of the sets already processed.
            for j in 0..i {
                let bmj = union_except(b, j);
                checks.push(moment_check(
                    format!("E3 mu(B_-{}^d; A_{})", j + 1, j + 1),
                    &g,
                    &ev,
                    sch.theta1,
                    p.s,
                    &bmj,
                    d_i,
                    &next[j],
                    slack,
                    mseed(64 + j as u64),
                )?);
            }
            // Event 4: defect budget of the shrunk complement into B_i.
            if r > 1 {
                let a_minus_i = union_except(&next, i);
                let ratio = b_minus_i.len() as f64 / a_minus_i.len().max(1) as f64;
                let bound = 4.0 * ratio.powi(d_i as i32) * p.xi.powi(t_i as i32);
                checks.push(moment_check(
                    format!("E4 mu(A_-{}^d; B_{})", i + 1, i + 1),
                    &g,
                    &ev,
                    sch.theta1,
                    p.s,
                    &a_minus_i,
                    d_i,
                    &b[i],
                    bound,
                    mseed(200),
                )?);
            }
            Ok(Attempt { witness: vec![x], checks, payload: next })
        })?;
        out.stages.push(stage_record(format!("round {}", i + 1), &l));
        if l.accepted.is_none() && out.failure.is_none() {
            out.failure = Some(format!(
                "round {}: {} after {} restarts",
                i + 1,
                first_failure(&l.best.checks).unwrap_or("?"),
                l.attempts
            ));
        }
        sets = l.best.payload;
    }

    for (j, s) in sets.iter().enumerate() {
        out.checks.push(Check::at_least(format!("|A_{}|", j + 1), s.len() as f64, p.theta));
    }
    if r > 1 {
        for j in 0..r {
            let others = union_except(&sets, j);
            out.checks.push(moment_check(
                format!("mu(A_-{}^d; A_{})", j + 1, j + 1),
                &g,
                &ev,
                p.theta,
                p.s,
                &others,
                p.d,
                &sets[j],
                p.xi.powi(p.t as i32),
                derive(seed, tag("drc-mutual-final"), j as u64),
            )?);
        }
    }
    out.sets = sets;
    let closing: Vec<Check> = out.checks.iter().filter(|c| !c.name.starts_with("chain ")).cloned().collect();
    out.success = out.failure.is_none() && all_passed(&closing);
    if out.failure.is_none() && !out.success {
        out.failure = first_failure(&closing).map(|s| format!("final check {s}"));
    }
    Ok(out)
}
