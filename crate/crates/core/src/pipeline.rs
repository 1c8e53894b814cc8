//! End-to-end runs: dependent random choice, pruning, random partition, layering of the
//! pattern and random greedy embedding, with outer retries.
//!
//! Two modes govern how measured guarantees are used. In `enforce` mode a stage whose
//! checks fail ends the current outer attempt. In `report` mode the stage's best sets
//! are passed on and the failed checks are only recorded; the final embedding is
//! verified either way.

use crate::decompose::{default_pad, forward_plan, split, DecomposeError, ForwardPlan, LayeredPartition};
use crate::defect::Evaluator;
use crate::drc::{drc_mutual, drc_pair, pair_core, ChainSchedule, DrcError, DrcOutcome, DrcParams};
use crate::embed::{
    certificate_check, plan_moment, random_greedy_embed, verify_embedding, Certificate, EmbedError, EmbedPlan,
    EmbedRun, Verification,
};
use crate::graph::{bipartition, degeneracy, greedy_color, min_degree_subgraph, Color, Graph, GraphError, TwoColoring, VertexSet};
use crate::prune::{random_partition, remove_concentrated, PartitionOutcome, PartitionParams, PruneError, PruneParams};
use crate::report::Check;
use crate::rng::{derive, stream, tag};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Drc(#[from] DrcError),
    #[error(transparent)]
    Prune(#[from] PruneError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Guarantees {
    Enforce,
    Report,
}

/// Length of the padded forward tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arity {
    /// `4d`.
    Padded,
    /// The largest forward degree of the layered pattern.
    Tight,
}

/// Per-layer host probabilities `p_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum PSchedule {
    /// `p_i ∝ 2^{-i/(80d)}`, normalized to sum 1.
    Geometric,
    /// `p_i ∝ |W_i|`.
    LayerSize,
    Explicit(Vec<f64>),
}

impl PSchedule {
    pub fn probabilities(&self, partition: &LayeredPartition, d: usize) -> Result<Vec<f64>, PipelineError> {
        let k = partition.k;
        let raw: Vec<f64> = match self {
            PSchedule::Geometric => (1..=k).map(|i| 2f64.powf(-(i as f64) / (80.0 * d.max(1) as f64))).collect(),
            PSchedule::LayerSize => (0..k).map(|i| partition.layer_size(i).max(1) as f64).collect(),
            PSchedule::Explicit(p) => {
                if p.len() != k {
                    return Err(PipelineError::Input(format!("explicit schedule has {} entries for {k} layers", p.len())));
                }
                return Ok(p.clone());
            }
        };
        let total: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|x| x / total).collect())
    }
}

/// Tuple lengths `t_0..t_r` of the mutual stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum RoundSchedule {
    /// `t_i = 8^{r+1-i}(d+t)`.
    Standard,
    /// `t` in every round.
    Flat,
    Explicit(Vec<usize>),
}

impl RoundSchedule {
    /// Explicit tuple lengths for `r` colors, or `None` for the standard schedule.
    pub fn rounds(&self, r: usize, t: usize) -> Option<Vec<usize>> {
        match self {
            RoundSchedule::Standard => None,
            RoundSchedule::Flat => Some(vec![t; r + 1]),
            RoundSchedule::Explicit(v) => Some(v.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub guarantees: Guarantees,
    /// Degeneracy used for layering; computed from the pattern when absent.
    pub d: Option<usize>,
    pub arity: Arity,
    pub s: u32,
    pub t: usize,
    /// Host-level threshold; defaults to the largest value the first stage admits.
    pub theta: Option<f64>,
    pub eta: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub xi: f64,
    pub alpha: f64,
    pub rounds: RoundSchedule,
    pub prune: bool,
    /// Moment order used by pruning; `s` when absent.
    pub prune_s: Option<u32>,
    pub p_schedule: PSchedule,
    pub max_restarts: usize,
    pub partition_restarts: usize,
    pub e1_samples: usize,
    pub embed_attempts: usize,
    pub outer_retries: usize,
    /// Compute the plan moment and failure bound for every plan.
    pub diagnostics: bool,
    pub fallback: bool,
    pub brute_force_limit: usize,
    pub brute_force_budget: u64,
    pub evaluator: Evaluator,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            guarantees: Guarantees::Enforce,
            d: None,
            arity: Arity::Padded,
            s: 8,
            t: 8,
            theta: None,
            eta: 0.25,
            eps: 0.5,
            eps_prime: 0.01,
            xi: 0.1,
            alpha: 0.5,
            rounds: RoundSchedule::Standard,
            prune: true,
            prune_s: None,
            p_schedule: PSchedule::Geometric,
            max_restarts: 100,
            partition_restarts: 50,
            e1_samples: 20_000,
            embed_attempts: 8,
            outer_retries: 4,
            diagnostics: true,
            fallback: true,
            brute_force_limit: 8,
            brute_force_budget: 5_000_000,
            evaluator: Evaluator::default(),
        }
    }
}

impl PipelineConfig {
    /// Settings that run at desk scale: no tuple draws (`t = s = 0`), no pruning,
    /// layer-proportional host sets, tight padding, a smaller exact-moment budget, and
    /// guarantees recorded rather than enforced.
    pub fn tuned() -> Self {
        PipelineConfig {
            guarantees: Guarantees::Report,
            arity: Arity::Tight,
            s: 0,
            t: 0,
            prune: false,
            p_schedule: PSchedule::LayerSize,
            rounds: RoundSchedule::Flat,
            e1_samples: 2_000,
            evaluator: Evaluator { exact_budget: 1_000_000, samples: 20_000, ..Evaluator::default() },
            ..PipelineConfig::default()
        }
    }

    fn enforce(&self) -> bool {
        self.guarantees == Guarantees::Enforce
    }
}

// ============================================================================
// Reports
// ============================================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Pipeline,
    FallbackGreedy,
    FallbackBruteForce,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub success: bool,
    pub attempts: usize,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl StageRecord {
    fn from_drc(name: &str, o: &DrcOutcome) -> Self {
        let mut notes: Vec<String> = o.failure.iter().cloned().collect();
        if let Some(s) = &o.schedule {
            notes.push(format!("schedule t = {:?}, d = {:?}", s.t, s.d));
            if !s.violations().is_empty() {
                notes.push(format!("schedule invariant fails at rounds {:?}", s.violations()));
            }
        }
        StageRecord {
            name: name.into(),
            success: o.success,
            attempts: o.stages.iter().map(|s| s.attempts).sum(),
            checks: o.all_checks().cloned().collect(),
            notes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDiagnostics {
    pub arity: usize,
    pub slots: usize,
    pub layer_sizes: Vec<usize>,
    pub target_sizes: Vec<usize>,
    pub thetas: Vec<f64>,
    pub gamma: f64,
    pub ratio_sum: f64,
    /// `μ_{4d}` of the plan, with sampled values raised by three standard errors.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ext")]
    pub moment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ext")]
    pub failure_bound: Option<f64>,
    pub hypothesis_violations: Vec<String>,
}

mod opt_ext {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "crate::real::ext_real")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(W).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "result", content = "map")]
pub enum Containment {
    Found(Vec<usize>),
    NotFound,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub seed: u64,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<Route>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    /// Brute-force search on the host the embedding used, for small patterns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Containment>,
    pub outer_attempts: usize,
    /// Stages of the last outer attempt.
    pub stages: Vec<StageRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanDiagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<EmbedRun>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl PipelineReport {
    fn new(config: &PipelineConfig, seed: u64) -> Self {
        PipelineReport {
            config: config.clone(),
            seed,
            success: false,
            route: None,
            color: None,
            embedding: None,
            verification: None,
            oracle: None,
            outer_attempts: 0,
            stages: Vec::new(),
            plan: None,
            certificate: None,
            run: None,
            failure: None,
        }
    }
}

// ============================================================================
// Pattern preparation
// ============================================================================

/// Layering of the pattern under a proper coloring, with forward tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedPattern {
    pub d: usize,
    pub coloring: Vec<usize>,
    pub partition: LayeredPartition,
    pub forward: ForwardPlan,
}

impl PreparedPattern {
    pub fn arity(&self) -> usize {
        self.forward.d_pad
    }
}

/// Bipartite patterns use their two-coloring; others a greedy coloring in degeneracy
/// order.
pub fn prepare_pattern(h: &Graph, cfg: &PipelineConfig) -> Result<PreparedPattern, PipelineError> {
    let dg = degeneracy(h);
    let d = cfg.d.unwrap_or(dg.d);
    let coloring = match bipartition(h) {
        Some(c) => c,
        None => greedy_color(h, &dg.ordering)?,
    };
    let partition = split(h, &coloring, d).map_err(|e| match e {
        DecomposeError::NotDegenerate { .. } => PipelineError::Input(e.to_string()),
        e => e.into(),
    })?;
    let pad = match cfg.arity {
        Arity::Padded => default_pad(d.max(1)),
        Arity::Tight => (0..h.n())
            .map(|x| h.neighbors(x).filter(|&u| partition.slot_of(u) > partition.slot_of(x)).count())
            .max()
            .unwrap_or(0),
    };
    let forward = forward_plan(h, &partition, pad)?;
    Ok(PreparedPattern { d, coloring, partition, forward })
}

// ============================================================================
// Shared tail: partition, plan, embed
// ============================================================================

/// Partition parameters for a prepared pattern at host threshold `theta`.
pub fn partition_params(pat: &PreparedPattern, theta: f64, cfg: &PipelineConfig) -> Result<PartitionParams, PipelineError> {
    Ok(PartitionParams {
        p: cfg.p_schedule.probabilities(&pat.partition, pat.d)?,
        theta,
        d: pat.arity().max(1),
        s: cfg.s,
        eps: cfg.eps,
        eps_prime: cfg.eps_prime,
        max_restarts: cfg.partition_restarts,
        e1_samples: cfg.e1_samples,
        evaluator: cfg.evaluator,
    })
}

/// Slot `(i, j)` targets cell `(i, j)` of the partition, with threshold
/// `max(p_i θ / 2r, 2|W_slot|)`. Host columns beyond the pattern's color count are unused.
pub fn plan_from_partition(pat: &PreparedPattern, part: &PartitionOutcome) -> Result<EmbedPlan, EmbedError> {
    let lp = &pat.partition;
    let mut targets = Vec::with_capacity(lp.slots());
    let mut thetas = Vec::with_capacity(lp.slots());
    for i in 0..lp.k {
        for j in 0..lp.r {
            let cell = part.sets.get(i).and_then(|row| row.get(j)).ok_or_else(|| {
                EmbedError::Plan(format!("partition has no cell ({}, {})", i + 1, j + 1))
            })?;
            targets.push(cell.clone());
            let w = lp.slot_members(lp.slot(i, j)).len();
            thetas.push(part.thetas[i].max(2.0 * w as f64));
        }
    }
    EmbedPlan::new(lp.clone(), pat.forward.clone(), targets, thetas)
}

struct Tail {
    stages: Vec<StageRecord>,
    plan: Option<PlanDiagnostics>,
    certificate: Option<Certificate>,
    run: Option<EmbedRun>,
    failure: Option<String>,
}

/// Split `sets` into slot targets and run the embedder on `g`.
fn partition_and_embed(
    g: &Graph,
    h: &Graph,
    pat: &PreparedPattern,
    sets: &[VertexSet],
    theta: f64,
    cfg: &PipelineConfig,
    enforce: bool,
    master: u64,
) -> Result<Tail, PipelineError> {
    let mut tail = Tail { stages: Vec::new(), plan: None, certificate: None, run: None, failure: None };
    let pp = partition_params(pat, theta, cfg)?;
    let part = random_partition(g, sets, &pp, derive(master, tag("stage-partition"), 0))?;
    tail.stages.push(StageRecord {
        name: "partition".into(),
        success: part.success,
        attempts: part.attempts,
        checks: part.checks.clone(),
        notes: part.failure.iter().cloned().chain(part.hypotheses.iter().cloned()).collect(),
    });
    if enforce && !part.success {
        tail.failure = Some(format!("partition: {}", part.failure.clone().unwrap_or_default()));
        return Ok(tail);
    }

    let lp = &pat.partition;
    let plan = match plan_from_partition(pat, &part) {
        Ok(p) => p,
        Err(EmbedError::Plan(msg)) => {
            tail.failure = Some(format!("plan: {msg}"));
            return Ok(tail);
        }
        Err(e) => return Err(e.into()),
    };
    let mut diag = PlanDiagnostics {
        arity: plan.arity(),
        slots: lp.slots(),
        layer_sizes: (0..lp.slots()).map(|s| lp.slot_members(s).len()).collect(),
        target_sizes: plan.targets.iter().map(VertexSet::len).collect(),
        thetas: plan.thetas.clone(),
        gamma: plan.gamma(),
        ratio_sum: plan.ratio_sum(),
        moment: None,
        failure_bound: None,
        hypothesis_violations: plan.hypothesis_violations(),
    };
    if cfg.diagnostics {
        let s = 4 * plan.arity().max(1) as u32;
        let m = plan_moment(g, &plan, s, &cfg.evaluator, derive(master, tag("stage-diagnostics"), 0))?;
        diag.moment = Some(m.upper);
        diag.failure_bound = Some(plan.failure_bound(m.upper));
    }
    tail.plan = Some(diag);

    let attempts = cfg.embed_attempts.max(1);
    let res = cfg.evaluator.exec.find_first(attempts, |a| {
        let run: Result<EmbedRun, EmbedError> = random_greedy_embed(g, &plan, derive(master, tag("stage-embed"), a as u64));
        let out: Result<Result<EmbedRun, EmbedError>, Result<EmbedRun, EmbedError>> = match run {
            Ok(r) if r.success => Ok(Ok(r)),
            Ok(r) => Err(Ok(r)),
            Err(e) => Err(Err(e)),
        };
        out
    });
    let (run, used) = match res {
        Ok((i, Ok(run))) => (run, i + 1),
        Ok((_, Err(e))) => return Err(e.into()),
        Err(fails) => {
            let mut last = None;
            for f in fails {
                last = Some(f?);
            }
            (last.expect("at least one attempt"), attempts)
        }
    };
    tail.certificate = Some(certificate_check(&run.state, &plan, 1)?);
    tail.stages.push(StageRecord {
        name: "embed".into(),
        success: run.success,
        attempts: used,
        checks: Vec::new(),
        notes: run.first_failure.iter().map(|f| format!("{:?} at vertex {} (slot {})", f.step, f.vertex, f.slot)).collect(),
    });
    if !run.success {
        tail.failure = Some("embed: every attempt fired a collision or empty step".into());
    } else {
        let emb = run.embedding.as_ref().expect("success carries an embedding");
        let v = verify_embedding(h, g, emb);
        assert!(v.ok, "embedder success failed verification: {:?}", v.violation);
    }
    tail.run = Some(run);
    Ok(tail)
}

fn finish_success(report: &mut PipelineReport, g: &Graph, h: &Graph, cfg: &PipelineConfig, route: Route, map: Vec<usize>) {
    let v = verify_embedding(h, g, &map);
    report.success = v.ok;
    report.verification = Some(v);
    report.route = Some(route);
    report.embedding = Some(map);
    report.failure = None;
    if h.n() <= cfg.brute_force_limit {
        report.oracle = Some(brute_force_contains(g, h, cfg.brute_force_budget));
    }
}

// ============================================================================
// Bipartite pipeline
// ============================================================================

/// Embed a bipartite pattern into `g`: min-degree core, balanced random halves,
/// pair DRC, random partition, layering and random greedy embedding.
pub fn embed_bipartite_pipeline(g: &Graph, h: &Graph, cfg: &PipelineConfig, seed: u64) -> Result<PipelineReport, PipelineError> {
    let m = g.n();
    if h.n() == 0 {
        return Err(PipelineError::Input("empty pattern".into()));
    }
    if h.n() > m {
        return Err(PipelineError::Input(format!("pattern has {} vertices, host {m}", h.n())));
    }
    if bipartition(h).is_none() {
        return Err(PipelineError::Input("pattern is not bipartite".into()));
    }
    let pat = prepare_pattern(h, cfg)?;
    let arity = pat.arity().max(1);
    let mut report = PipelineReport::new(cfg, seed);

    let core = min_degree_subgraph(g, cfg.alpha * m as f64 / 2.0);
    let core_rec = StageRecord {
        name: "min-degree".into(),
        success: core.len() >= 2,
        attempts: 1,
        checks: vec![Check::at_least("|core|", core.len() as f64, 2.0)],
        notes: vec![],
    };
    if core.len() < 2 {
        report.stages.push(core_rec);
        report.failure = Some("min-degree core has fewer than 2 vertices".into());
        return Ok(report);
    }
    let half = core.len() / 2;
    let drc = DrcParams {
        d: arity,
        s: cfg.s,
        t: cfg.t,
        eta: cfg.eta,
        eps: cfg.eps,
        alpha: cfg.alpha,
        xi: cfg.xi,
        theta: 1.0,
        max_restarts: cfg.max_restarts,
        rounds: None,
        evaluator: cfg.evaluator,
    };
    let theta = cfg
        .theta
        .unwrap_or_else(|| (0.5 * cfg.eta * cfg.alpha.powi((arity + cfg.t) as i32) * half as f64).max(1.0));
    let drc = DrcParams { theta, ..drc };

    for outer in 0..cfg.outer_retries.max(1) {
        let master = derive(seed, tag("outer"), outer as u64);
        report.outer_attempts = outer + 1;
        report.stages = vec![core_rec.clone()];
        let mut members = core.to_vec();
        members.shuffle(&mut stream(master, tag("stage-bipartition"), 0));
        let v1 = VertexSet::from_vertices(m, &members[..half])?;
        let v2 = VertexSet::from_vertices(m, &members[half..2 * half])?;
        report.stages.push(StageRecord {
            name: "bipartition".into(),
            success: true,
            attempts: 1,
            checks: vec![],
            notes: vec![format!("|V1| = |V2| = {half}")],
        });

        let pair_seed = derive(master, tag("stage-pair"), 0);
        let pair = if cfg.enforce() {
            match drc_pair(g, &v1, &v2, &drc, pair_seed) {
                Ok(o) => o,
                Err(DrcError::Precondition(msg)) => {
                    report.failure = Some(format!("pair: {msg}"));
                    report.stages.push(StageRecord { name: "pair".into(), success: false, attempts: 0, checks: vec![], notes: vec![msg] });
                    continue;
                }
                Err(e) => return Err(e.into()),
            }
        } else {
            pair_core(g, &v1, &v2, &drc, pair_seed)?.0
        };
        report.stages.push(StageRecord::from_drc("pair", &pair));
        if cfg.enforce() && !pair.success {
            report.failure = Some(format!("pair: {}", pair.failure.clone().unwrap_or_default()));
            continue;
        }
        let sets = pair.sets.clone();
        if sets.iter().any(VertexSet::is_empty) {
            report.failure = Some("pair: empty side".into());
            continue;
        }
        let tail = partition_and_embed(g, h, &pat, &sets, theta, cfg, cfg.enforce(), master)?;
        report.stages.extend(tail.stages);
        report.plan = tail.plan;
        report.certificate = tail.certificate;
        report.failure = tail.failure;
        let emb = tail.run.as_ref().and_then(|r| r.embedding.clone());
        report.run = tail.run;
        if let Some(map) = emb {
            finish_success(&mut report, g, h, cfg, Route::Pipeline, map);
            return Ok(report);
        }
    }
    Ok(report)
}

// ============================================================================
// Monochromatic pipeline
// ============================================================================

/// Find the pattern in one color of a red/blue coloring of `K_m`.
pub fn find_monochromatic(coloring: &TwoColoring, h: &Graph, cfg: &PipelineConfig, seed: u64) -> Result<PipelineReport, PipelineError> {
    let m = coloring.m();
    if h.n() == 0 {
        return Err(PipelineError::Input("empty pattern".into()));
    }
    if h.n() > m {
        return Err(PipelineError::Input(format!("pattern has {} vertices, host {m}", h.n())));
    }
    let pat = prepare_pattern(h, cfg)?;
    let r = pat.partition.r;
    let arity = pat.arity().max(1);
    let theta = cfg.theta.unwrap_or((cfg.xi * cfg.xi * m as f64).max(1.0));
    let drc = DrcParams {
        d: arity,
        s: cfg.s,
        t: cfg.t,
        eta: cfg.eta,
        eps: cfg.eps,
        alpha: cfg.alpha,
        xi: cfg.xi,
        theta,
        max_restarts: cfg.max_restarts,
        rounds: cfg.rounds.rounds(r, cfg.t),
        evaluator: cfg.evaluator,
    };
    let mut report = PipelineReport::new(cfg, seed);

    for outer in 0..cfg.outer_retries.max(1) {
        let master = derive(seed, tag("outer"), outer as u64);
        report.outer_attempts = outer + 1;
        report.stages.clear();
        let mutual = drc_mutual(coloring, r, &drc, derive(master, tag("stage-mutual"), 0))?;
        report.stages.push(StageRecord::from_drc("mutual", &mutual));
        if cfg.enforce() && !mutual.success {
            report.failure = Some(format!("mutual: {}", mutual.failure.clone().unwrap_or_default()));
            continue;
        }
        let color = mutual.color.expect("mutual outcome carries a color");
        let gc = coloring.color_graph(color);
        let mut sets = mutual.sets.clone();
        if cfg.prune && r > 1 {
            let pp = PruneParams {
                d: arity,
                s: cfg.prune_s.unwrap_or(cfg.s),
                theta,
                evaluator: cfg.evaluator,
                ..PruneParams::default()
            };
            let pr = remove_concentrated(&gc, &sets, &pp, derive(master, tag("stage-prune"), 0))?;
            report.stages.push(StageRecord {
                name: "prune".into(),
                success: pr.success,
                attempts: 1,
                checks: pr.checks.clone(),
                notes: pr.failure.iter().cloned().chain(pr.hypotheses.iter().cloned()).collect(),
            });
            if cfg.enforce() && !pr.success {
                report.failure = Some(format!("prune: {}", pr.failure.clone().unwrap_or_default()));
                continue;
            }
            sets = pr.sets;
        }
        if sets.iter().any(VertexSet::is_empty) {
            report.failure = Some("an empty host set reached the partition stage".into());
            continue;
        }
        let tail = partition_and_embed(&gc, h, &pat, &sets, theta, cfg, cfg.enforce(), master)?;
        report.stages.extend(tail.stages);
        report.plan = tail.plan;
        report.certificate = tail.certificate;
        report.failure = tail.failure;
        let emb = tail.run.as_ref().and_then(|r| r.embedding.clone());
        report.run = tail.run;
        if let Some(map) = emb {
            report.color = Some(color);
            finish_success(&mut report, &gc, h, cfg, Route::Pipeline, map);
            return Ok(report);
        }
    }
    if cfg.fallback {
        fallback(coloring, h, &pat, cfg, seed, &mut report)?;
    }
    Ok(report)
}

/// Without any dependent random choice: brute force for tiny patterns, otherwise the
/// embedder on a random partition of all of `K_m`, trying both colors.
fn fallback(
    coloring: &TwoColoring,
    h: &Graph,
    pat: &PreparedPattern,
    cfg: &PipelineConfig,
    seed: u64,
    report: &mut PipelineReport,
) -> Result<(), PipelineError> {
    let m = coloring.m();
    let pipeline_failure = report.failure.take().unwrap_or_default();
    for color in [Color::Red, Color::Blue] {
        let gc = coloring.color_graph(color);
        if h.n() <= cfg.brute_force_limit {
            if let Containment::Found(map) = brute_force_contains(&gc, h, cfg.brute_force_budget) {
                report.color = Some(color);
                finish_success(report, &gc, h, cfg, Route::FallbackBruteForce, map);
                return Ok(());
            }
            continue;
        }
        let sets = vec![VertexSet::full(m); pat.partition.r];
        let loose = PipelineConfig { partition_restarts: 1, diagnostics: false, ..cfg.clone() };
        let master = derive(seed, tag("fallback"), color as u64);
        let tail = partition_and_embed(&gc, h, pat, &sets, (cfg.xi * cfg.xi * m as f64).max(1.0), &loose, false, master)?;
        if let Some(map) = tail.run.as_ref().and_then(|r| r.embedding.clone()) {
            report.stages.extend(tail.stages.into_iter().map(|mut s| {
                s.name = format!("fallback {}", s.name);
                s
            }));
            report.run = tail.run;
            report.color = Some(color);
            finish_success(report, &gc, h, cfg, Route::FallbackGreedy, map);
            return Ok(());
        }
    }
    report.failure = Some(format!("{pipeline_failure}; fallback found nothing"));
    Ok(())
}

// ============================================================================
// Brute-force oracle
// ============================================================================

/// Backtracking search for a copy of `h` in `g`; `Unknown` once `budget` search nodes
/// have been expanded.
pub fn brute_force_contains(g: &Graph, h: &Graph, budget: u64) -> Containment {
    let n = h.n();
    if n == 0 {
        return Containment::Found(Vec::new());
    }
    if n > g.n() {
        return Containment::NotFound;
    }
    // Order: repeatedly take the vertex with the most already-ordered neighbors.
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    for _ in 0..n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let back = h.neighbors(v).filter(|&u| placed[u]).count();
                (back, h.degree(v), std::cmp::Reverse(v))
            })
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; g.n()];
    let mut nodes = 0u64;
    match search(g, h, &order, 0, &mut map, &mut used, &mut nodes, budget) {
        Some(true) => Containment::Found(map),
        Some(false) => Containment::NotFound,
        None => Containment::Unknown,
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    g: &Graph,
    h: &Graph,
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    if depth == order.len() {
        return Some(true);
    }
    let x = order[depth];
    let anchors: Vec<usize> = h.neighbors(x).filter(|&u| map[u] != usize::MAX).map(|u| map[u]).collect();
    let candidates: Vec<usize> = match anchors.first() {
        Some(&a) => g.neighbors(a).filter(|&c| anchors[1..].iter().all(|&b| g.has_edge(b, c))).collect(),
        None => (0..g.n()).collect(),
    };
    for c in candidates {
        if used[c] {
            continue;
        }
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        map[x] = c;
        used[c] = true;
        let found = search(g, h, order, depth + 1, map, used, nodes, budget);
        used[c] = false;
        match found {
            Some(false) => map[x] = usize::MAX,
            other => return other,
        }
    }
    Some(false)
}

/// The standard mutual-round schedule for a pattern, for logging next to a run.
pub fn reference_schedule(cfg: &PipelineConfig, pat: &PreparedPattern, m: usize) -> ChainSchedule {
    ChainSchedule::standard(pat.arity().max(1), cfg.t, pat.partition.r, cfg.xi, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, hypercube, path, random_coloring, random_graph};

    #[test]
    fn brute_force_examples() {
        let k3 = Graph::complete(3);
        assert!(matches!(brute_force_contains(&k3, &k3, 1000), Containment::Found(_)));
        assert_eq!(brute_force_contains(&cycle(5), &Graph::complete(4), 1000), Containment::NotFound);
        let c8 = hypercube(3);
        assert_eq!(brute_force_contains(&random_graph(40, 0.5, 1).unwrap(), &c8, 1), Containment::Unknown);
    }

    #[test]
    fn path_in_complete_host() {
        let g = Graph::complete(200);
        let h = path(20);
        let cfg = PipelineConfig { diagnostics: false, ..PipelineConfig::tuned() };
        let rep = embed_bipartite_pipeline(&g, &h, &cfg, 3).unwrap();
        assert!(rep.success, "{:?}", rep.failure);
        assert_eq!(rep.route, Some(Route::Pipeline));
        assert!(verify_embedding(&h, &g, rep.embedding.as_ref().unwrap()).ok);
    }

    #[test]
    fn oversized_pattern_is_input_error() {
        let g = Graph::complete(5);
        assert!(matches!(embed_bipartite_pipeline(&g, &path(6), &PipelineConfig::default(), 0), Err(PipelineError::Input(_))));
        assert!(matches!(embed_bipartite_pipeline(&g, &Graph::complete(3), &PipelineConfig::default(), 0), Err(PipelineError::Input(_))));
    }

    #[test]
    fn triangle_in_random_coloring() {
        let c = random_coloring(100, 4);
        let rep = find_monochromatic(&c, &Graph::complete(3), &PipelineConfig::tuned(), 1).unwrap();
        assert!(rep.success, "{:?}", rep.failure);
        assert!(matches!(rep.oracle, Some(Containment::Found(_))));
    }

    #[test]
    fn runs_are_deterministic() {
        let c = random_coloring(120, 9);
        let h = cycle(6);
        let cfg = PipelineConfig::tuned();
        let a = serde_json::to_string(&find_monochromatic(&c, &h, &cfg, 5).unwrap()).unwrap();
        let b = serde_json::to_string(&find_monochromatic(&c, &h, &cfg, 5).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schedules() {
        let h = path(5);
        let pat = prepare_pattern(&h, &PipelineConfig::default()).unwrap();
        let p = PSchedule::Geometric.probabilities(&pat.partition, 1).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(matches!(PSchedule::Explicit(vec![0.5, 0.5]).probabilities(&pat.partition, 1), Err(PipelineError::Input(_))));
    }
}
