use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ramsey_embed::decompose::{forward_plan, split};
use ramsey_embed::defect::{DefectParams, MomentResult};
use ramsey_embed::drc::{drc_bipartite, drc_chain, drc_general, drc_mutual, drc_pair, DrcOutcome, DrcParams};
use ramsey_embed::embed::verify_embedding;

use ramsey_embed::graph::{
    bipartition, complete_bipartite, cycle, parse_coloring, parse_edge_list, write_coloring, write_edge_list, degeneracy, greedy_color, hypercube, path, random_bipartite,
    random_coloring, random_degenerate, random_degenerate_bipartite, random_graph, star,
};
use ramsey_embed::pipeline::{
    embed_bipartite_pipeline, find_monochromatic, partition_params, plan_from_partition, prepare_pattern,
    PipelineConfig, PipelineReport,
};
use ramsey_embed::prune::random_partition;
use ramsey_embed::{Color, Graph, TwoColoring, VertexSet};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ramsey-embed", version, about = "Embed sparse patterns into dense hosts and two-colorings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON object overriding fields of the preset configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Preset::Tuned)]
    preset: Preset,
    /// Defaults to `text` for `gen` and `json` otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Repeat with seeds `seed, seed+1, ...`.
    #[arg(long, global = true, default_value_t = 1)]
    trials: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Default,
    Tuned,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random or named graph, or a random coloring, as an edge list.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Second side for `bipartite` and `kab`.
        #[arg(long, default_value_t = 10)]
        n2: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Layer a pattern by color class and degeneracy peeling.
    Decompose {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        d: Option<usize>,
    },
    /// Defect moment of a product of vertex sets against a target.
    Moment {
        #[arg(long)]
        graph: PathBuf,
        /// One factor per use, e.g. `0-9,12` or `all`.
        #[arg(long = "factor", required = true)]
        factors: Vec<String>,
        #[arg(long, default_value = "all")]
        target: String,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 1)]
        s: u32,
    },
    /// Dependent random choice on a graph or a coloring.
    Drc {
        #[arg(value_enum)]
        op: DrcKind,
        /// Host graph for `bipartite`, `general` and `pair`.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Coloring for `chain` and `mutual`.
        #[arg(long)]
        coloring: Option<PathBuf>,
        #[arg(long, default_value = "all")]
        v1: String,
        #[arg(long, default_value = "all")]
        v2: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Number of colors in the chain.
        #[arg(long, default_value_t = 2)]
        r: usize,
    },
    /// Random layer partition of host sets for a pattern.
    Partition {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        /// One host set per pattern color; default splits the host into equal blocks.
        #[arg(long = "set")]
        sets: Vec<String>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Embed a bipartite pattern into a host graph.
    Embed {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
    },
    /// Find a monochromatic copy of a pattern in a coloring of `K_m`.
    Ramsey {
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
    },
    /// Re-check an embedding from a report or a bare JSON vertex map.
    Verify {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        coloring: Option<PathBuf>,
        /// Which color class of `--coloring`; read from the report when absent.
        #[arg(long, value_enum)]
        color: Option<ColorArg>,
        #[arg(long)]
        embedding: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Graph,
    Bipartite,
    Coloring,
    Degenerate,
    DegenerateBipartite,
    Path,
    Cycle,
    Star,
    Kab,
    Hypercube,
}

#[derive(Clone, Copy, ValueEnum)]
enum DrcKind {
    Bipartite,
    General,
    Pair,
    Chain,
    Mutual,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColorArg {
    Red,
    Blue,
}

/// Input problems map to exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Res<T> = Result<T, InputError>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Res<Graph> {
    parse_edge_list(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_coloring(path: &Path) -> Res<TwoColoring> {
    parse_coloring(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_config(c: &Common) -> Res<PipelineConfig> {
    let base = match c.preset {
        Preset::Default => PipelineConfig::default(),
        Preset::Tuned => PipelineConfig::tuned(),
    };
    let Some(path) = &c.config else { return Ok(base) };
    let overrides: Value = serde_json::from_str(&read(path)?)?;
    let Value::Object(overrides) = overrides else {
        return Err(InputError(format!("{}: config must be a JSON object", path.display())));
    };
    let mut merged = serde_json::to_value(&base)?;
    merge(&mut merged, overrides, "").map_err(|k| InputError(format!("{}: unknown config field `{k}`", path.display())))?;
    serde_json::from_value(merged).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Overlay `over` onto `base`, recursing into nested objects. Returns the dotted path of
/// the first key `base` does not have.
fn merge(base: &mut Value, over: serde_json::Map<String, Value>, prefix: &str) -> Result<(), String> {
    let fields = base.as_object_mut().expect("merge target is an object");
    for (k, v) in over {
        let path = format!("{prefix}{k}");
        match (fields.get_mut(&k), v) {
            (None, _) => return Err(path),
            (Some(slot @ Value::Object(_)), Value::Object(inner)) => merge(slot, inner, &format!("{path}."))?,
            (Some(slot), v) => *slot = v,
        }
    }
    Ok(())
}

/// `all`, or comma-separated vertices and inclusive ranges `a-b`.
fn parse_set(n: usize, spec: &str) -> Res<VertexSet> {
    if spec.trim() == "all" {
        return Ok(VertexSet::full(n));
    }
    let mut vs = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
                vs.extend(a..=b);
            }
            None => vs.push(part.parse()?),
        }
    }
    Ok(VertexSet::from_vertices(n, &vs)?)
}

/// Every report carries what is needed to replay it.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a PipelineConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<Value>,
    success: bool,
    result: T,
}

struct Outcome {
    success: bool,
    json: Value,
    text: String,
}

fn envelope<T: Serialize>(cmd: &str, seed: u64, cfg: &PipelineConfig, params: Option<Value>, success: bool, result: T) -> Res<Value> {
    Ok(serde_json::to_value(Envelope { command: cmd, seed, config: cfg, params, success, result })?)
}

fn run_seeds(c: &Common, mut one: impl FnMut(u64) -> Res<Outcome>) -> Res<Outcome> {
    if c.trials <= 1 {
        return one(c.seed);
    }
    let mut reports = Vec::new();
    let mut text = String::new();
    let mut wins = 0;
    for i in 0..c.trials {
        let o = one(c.seed.wrapping_add(i))?;
        wins += o.success as u64;
        text.push_str(&o.text);
        reports.push(o.json);
    }
    text.push_str(&format!("{wins}/{} trials succeeded\n", c.trials));
    Ok(Outcome {
        success: wins == c.trials,
        json: json!({ "trials": c.trials, "successes": wins, "reports": reports }),
        text,
    })
}

fn pipeline_text(r: &PipelineReport) -> String {
    let mut s = format!("seed {}: {}", r.seed, if r.success { "found" } else { "not found" });
    if let Some(route) = &r.route {
        s.push_str(&format!(" via {route:?}"));
    }
    if let Some(c) = r.color {
        s.push_str(&format!(" in {c:?}"));
    }
    if let Some(f) = &r.failure {
        s.push_str(&format!(" ({f})"));
    }
    s.push('\n');
    if let Some(m) = &r.embedding {
        s.push_str(&format!("  map {m:?}\n"));
    }
    s
}

fn drc_text(o: &DrcOutcome) -> String {
    let sizes: Vec<usize> = o.sets.iter().map(VertexSet::len).collect();
    let mut s = format!("seed {}: {:?} {} with set sizes {sizes:?}", o.seed, o.op, if o.success { "succeeded" } else { "failed" });
    if let Some(f) = &o.failure {
        s.push_str(&format!(" ({f})"));
    }
    s.push('\n');
    s
}

fn gen(c: &Common, kind: GenKind, n: usize, n2: usize, p: f64, d: usize) -> Res<Outcome> {
    let seed = c.seed;
    let graph = match kind {
        GenKind::Coloring => {
            let col = random_coloring(n, seed);
            let text = format!("# seed {seed}\n{}", write_coloring(&col));
            let json = json!({ "command": "gen", "seed": seed, "kind": "coloring", "m": n, "red": col.red().edges() });
            return Ok(Outcome { success: true, json, text });
        }
        GenKind::Graph => random_graph(n, p, seed)?,
        GenKind::Bipartite => random_bipartite(n, n2, p, seed)?,
        GenKind::Degenerate => random_degenerate(n, d, seed),
        GenKind::DegenerateBipartite => random_degenerate_bipartite(n, d, seed),
        GenKind::Path => path(n),
        GenKind::Cycle => cycle(n),
        GenKind::Star => star(n),
        GenKind::Kab => complete_bipartite(n, n2),
        GenKind::Hypercube => hypercube(u32::try_from(n).map_err(|_| InputError("dimension too large".into()))?),
    };
    let text = format!("# seed {seed}\n{}", write_edge_list(&graph));
    let json = json!({ "command": "gen", "seed": seed, "n": graph.n(), "edges": graph.edges() });
    Ok(Outcome { success: true, json, text })
}

fn decompose(c: &Common, cfg: &PipelineConfig, pattern: &Path, d: Option<usize>) -> Res<Outcome> {
    let h = load_graph(pattern)?;
    let dg = degeneracy(&h);
    let d = d.or(cfg.d).unwrap_or(dg.d);
    let coloring = match bipartition(&h) {
        Some(col) => col,
        None => greedy_color(&h, &dg.ordering)?,
    };
    let lp = split(&h, &coloring, d)?;
    let violations = lp.check_invariants(&h, d);
    let pad = (0..h.n())
        .map(|x| h.neighbors(x).filter(|&u| lp.slot_of(u) > lp.slot_of(x)).count())
        .max()
        .unwrap_or(0);
    let fwd = forward_plan(&h, &lp, pad)?;
    let ok = violations.is_empty();
    let text = format!(
        "n {} d {d} colors {} layers {} peel sizes {:?} max forward {}\n{}",
        lp.n,
        lp.r,
        lp.k,
        lp.peel_sizes,
        fwd.max_forward(),
        violations.iter().map(|v| format!("violation: {v}\n")).collect::<String>()
    );
    let result = json!({ "degeneracy": dg.d, "coloring": coloring, "partition": lp, "max_forward": fwd.max_forward(), "violations": violations });
    Ok(Outcome { success: ok, json: envelope("decompose", c.seed, cfg, Some(json!({ "d": d })), ok, result)?, text })
}

fn moment(c: &Common, cfg: &PipelineConfig, graph: &Path, factors: &[String], target: &str, theta: f64, s: u32) -> Res<Outcome> {
    let g = load_graph(graph)?;
    let fs = factors.iter().map(|f| parse_set(g.n(), f)).collect::<Res<Vec<_>>>()?;
    let t = parse_set(g.n(), target)?;
    let params = DefectParams::new(theta, s, fs.len())?;
    let pj = json!({ "theta": theta, "s": s, "factors": factors, "target": target });
    run_seeds(c, |seed| {
        let m: MomentResult = cfg.evaluator.moment(&g, &params, &fs, &t, seed)?;
        let text = format!("seed {seed}: moment {} ({:?}, se {})\n", m.value, m.mode, m.std_error);
        Ok(Outcome { success: true, json: envelope("moment", seed, cfg, Some(pj.clone()), true, m)?, text })
    })
}

#[allow(clippy::too_many_arguments)]
fn drc(
    c: &Common,
    cfg: &PipelineConfig,
    op: DrcKind,
    graph: Option<&Path>,
    coloring: Option<&Path>,
    v1: &str,
    v2: &str,
    d: usize,
    theta: f64,
    r: usize,
) -> Res<Outcome> {
    let p = DrcParams {
        d,
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
    let pj = serde_json::to_value(&p)?;
    let need = |x: Option<&Path>, flag: &str| x.map(Path::to_path_buf).ok_or_else(|| InputError(format!("this operation needs --{flag}")));
    let run: Box<dyn Fn(u64) -> Res<DrcOutcome>> = match op {
        DrcKind::Chain | DrcKind::Mutual => {
            let col = load_coloring(&need(coloring, "coloring")?)?;
            let p = p.clone();
            Box::new(move |seed| {
                Ok(match op {
                    DrcKind::Chain => drc_chain(&col, r, &p, seed)?,
                    _ => drc_mutual(&col, r, &p, seed)?,
                })
            })
        }
        _ => {
            let g = load_graph(&need(graph, "graph")?)?;
            let (a, b) = (parse_set(g.n(), v1)?, parse_set(g.n(), v2)?);
            let p = p.clone();
            Box::new(move |seed| {
                Ok(match op {
                    DrcKind::Bipartite => drc_bipartite(&g, &a, &b, &p, seed)?,
                    DrcKind::General => drc_general(&g, &a, &b, &p, seed)?,
                    _ => drc_pair(&g, &a, &b, &p, seed)?,
                })
            })
        }
    };
    run_seeds(c, |seed| {
        let out = run(seed)?;
        let text = drc_text(&out);
        Ok(Outcome { success: out.success, json: envelope("drc", seed, cfg, Some(pj.clone()), out.success, &out)?, text })
    })
}

fn partition(c: &Common, cfg: &PipelineConfig, graph: &Path, pattern: &Path, sets: &[String], theta: Option<f64>) -> Res<Outcome> {
    let g = load_graph(graph)?;
    let h = load_graph(pattern)?;
    let pat = prepare_pattern(&h, cfg)?;
    let r = pat.partition.r;
    let host_sets: Vec<VertexSet> = if sets.is_empty() {
        (0..r).map(|j| VertexSet::range(g.n(), j * g.n() / r, (j + 1) * g.n() / r)).collect()
    } else {
        sets.iter().map(|s| parse_set(g.n(), s)).collect::<Res<_>>()?
    };
    let theta = theta.or(cfg.theta).unwrap_or(1.0);
    let pp = partition_params(&pat, theta, cfg)?;
    let pj = serde_json::to_value(&pp)?;
    run_seeds(c, |seed| {
        let out = random_partition(&g, &host_sets, &pp, seed)?;
        let plan = plan_from_partition(&pat, &out);
        let sizes: Vec<Vec<usize>> = out.sets.iter().map(|row| row.iter().map(VertexSet::len).collect()).collect();
        let mut text = format!("seed {seed}: partition {} after {} draws, cell sizes {sizes:?}\n", if out.success { "accepted" } else { "rejected" }, out.attempts);
        let plan_json = match &plan {
            Ok(p) => json!({ "gamma": p.gamma(), "ratio_sum": p.ratio_sum(), "thetas": p.thetas, "hypothesis_violations": p.hypothesis_violations() }),
            Err(e) => {
                text.push_str(&format!("  no plan: {e}\n"));
                json!({ "error": e.to_string() })
            }
        };
        let ok = out.success && plan.is_ok();
        let result = json!({ "partition": out, "plan": plan_json });
        Ok(Outcome { success: ok, json: envelope("partition", seed, cfg, Some(pj.clone()), ok, result)?, text })
    })
}

fn pipeline_outcome(cmd: &str, r: PipelineReport) -> Res<Outcome> {
    let text = pipeline_text(&r);
    let success = r.success;
    Ok(Outcome { success, json: serde_json::to_value(json!({ "command": cmd, "report": r }))?, text })
}

fn embed(c: &Common, cfg: &PipelineConfig, graph: &Path, pattern: &Path) -> Res<Outcome> {
    let g = load_graph(graph)?;
    let h = load_graph(pattern)?;
    run_seeds(c, |seed| pipeline_outcome("embed", embed_bipartite_pipeline(&g, &h, cfg, seed)?))
}

fn ramsey(c: &Common, cfg: &PipelineConfig, coloring: &Path, pattern: &Path) -> Res<Outcome> {
    let col = load_coloring(coloring)?;
    let h = load_graph(pattern)?;
    run_seeds(c, |seed| pipeline_outcome("ramsey", find_monochromatic(&col, &h, cfg, seed)?))
}

/// Vertex map and color from a bare array, a pipeline report, a CLI envelope or an
/// embedder run.
fn extract_map(v: &Value) -> Res<(Vec<usize>, Option<Color>)> {
    if v.is_array() {
        return Ok((serde_json::from_value(v.clone())?, None));
    }
    let inner = v.get("report").unwrap_or(v);
    let map = inner.get("embedding").filter(|m| !m.is_null()).ok_or_else(|| InputError("no embedding in the input".into()))?;
    let color = match inner.get("color") {
        Some(c) if !c.is_null() => Some(serde_json::from_value(c.clone())?),
        _ => None,
    };
    Ok((serde_json::from_value(map.clone())?, color))
}

fn verify(
    c: &Common,
    cfg: &PipelineConfig,
    pattern: &Path,
    graph: Option<&Path>,
    coloring: Option<&Path>,
    color: Option<ColorArg>,
    embedding: &Path,
) -> Res<Outcome> {
    let h = load_graph(pattern)?;
    let (map, found) = extract_map(&serde_json::from_str(&read(embedding)?)?)?;
    let (g, used) = match (graph, coloring) {
        (Some(gp), None) => (load_graph(gp)?, None),
        (None, Some(cp)) => {
            let col = load_coloring(cp)?;
            let chosen = match color {
                Some(ColorArg::Red) => Color::Red,
                Some(ColorArg::Blue) => Color::Blue,
                None => found.ok_or_else(|| InputError("pass --color; the input names none".into()))?,
            };
            (col.color_graph(chosen), Some(chosen))
        }
        _ => return Err(InputError("pass exactly one of --graph and --coloring".into())),
    };
    let v = verify_embedding(&h, &g, &map);
    let text = match &v.violation {
        None => "valid embedding\n".to_string(),
        Some(x) => format!("invalid embedding: {x:?}\n"),
    };
    let result = json!({ "verification": v, "color": used, "map": map });
    Ok(Outcome { success: v.ok, json: envelope("verify", c.seed, cfg, None, v.ok, result)?, text })
}

fn dispatch(cli: &Cli) -> Res<Outcome> {
    let c = &cli.common;
    let cfg = load_config(c)?;
    match &cli.cmd {
        Cmd::Gen { kind, n, n2, p, d } => gen(c, *kind, *n, *n2, *p, *d),
        Cmd::Decompose { pattern, d } => decompose(c, &cfg, pattern, *d),
        Cmd::Moment { graph, factors, target, theta, s } => moment(c, &cfg, graph, factors, target, *theta, *s),
        Cmd::Drc { op, graph, coloring, v1, v2, d, theta, r } => {
            drc(c, &cfg, *op, graph.as_deref(), coloring.as_deref(), v1, v2, *d, *theta, *r)
        }
        Cmd::Partition { graph, pattern, sets, theta } => partition(c, &cfg, graph, pattern, sets, *theta),
        Cmd::Embed { graph, pattern } => embed(c, &cfg, graph, pattern),
        Cmd::Ramsey { coloring, pattern } => ramsey(c, &cfg, coloring, pattern),
        Cmd::Verify { pattern, graph, coloring, color, embedding } => {
            verify(c, &cfg, pattern, graph.as_deref(), coloring.as_deref(), *color, embedding)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            let default = if matches!(cli.cmd, Cmd::Gen { .. }) { Format::Text } else { Format::Json };
            let body = match cli.common.format.unwrap_or(default) {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("reports serialize") + "\n",
                Format::Text => out.text,
            };
            // A closed pipe (`| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(if out.success { 0 } else { 1 })
        }
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
