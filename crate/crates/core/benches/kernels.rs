//! Sequential vs parallel execution of the hot kernels. Both paths return identical
//! results; only wall time differs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ramsey_embed::defect::{DefectParams, Evaluator};
use ramsey_embed::drc::{drc_bipartite, DrcParams};
use ramsey_embed::graph::{random_bipartite, random_coloring, random_degenerate, random_graph};
use ramsey_embed::pipeline::{find_monochromatic, PipelineConfig};
use ramsey_embed::{Exec, VertexSet};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn moments(c: &mut Criterion) {
    let g = random_graph(400, 0.6, 1).unwrap();
    let all = VertexSet::full(400);
    let params = DefectParams::new(20.0, 2, 2).unwrap();
    let mut group = c.benchmark_group("moment");
    for (name, exec) in MODES {
        let ev = Evaluator { exact_budget: u64::MAX, samples: 50_000, exec };
        group.bench_function(BenchmarkId::new("exact", name), |b| {
            b.iter(|| ev.moment_exact(&g, &params, &[&all, &all], &all).unwrap())
        });
        group.bench_function(BenchmarkId::new("sampled", name), |b| {
            b.iter(|| ev.moment_sampled(&g, &params, &[&all, &all], &all, 50_000, black_box(7)).unwrap())
        });
    }
    group.finish();
}

fn dependent_choice(c: &mut Criterion) {
    let g = random_bipartite(1000, 1000, 0.5, 2).unwrap();
    let v1 = VertexSet::range(2000, 0, 1000);
    let v2 = VertexSet::range(2000, 1000, 2000);
    let mut group = c.benchmark_group("drc_bipartite");
    group.sample_size(20);
    for (name, exec) in MODES {
        let p = DrcParams { d: 2, t: 3, s: 1, theta: 30.0, evaluator: Evaluator::default().with_exec(exec), ..DrcParams::default() };
        group.bench_function(name, |b| b.iter(|| drc_bipartite(&g, &v1, &v2, &p, black_box(3)).unwrap()));
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let col = random_coloring(400, 5);
    let h = random_degenerate(30, 2, 5);
    let mut group = c.benchmark_group("find_monochromatic");
    group.sample_size(10);
    for (name, exec) in MODES {
        let base = PipelineConfig::tuned();
        let cfg = PipelineConfig { evaluator: Evaluator { exec, ..base.evaluator }, ..base };
        group.bench_function(name, |b| b.iter(|| find_monochromatic(&col, &h, &cfg, black_box(9)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, moments, dependent_choice, pipeline);
criterion_main!(benches);
