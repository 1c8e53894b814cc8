mod common;

use proptest::prelude::*;
use rand::Rng as _;
use ramsey_embed::defect::Evaluator;
use ramsey_embed::drc::{defect_transfer_check, drc_bipartite, drc_chain, drc_general, reverify_single, DrcParams};
use ramsey_embed::graph::{random_bipartite, random_coloring, random_graph, VertexSet};
use ramsey_embed::Exec;

fn sides(n1: usize, n2: usize) -> (VertexSet, VertexSet) {
    (VertexSet::range(n1 + n2, 0, n1), VertexSet::range(n1 + n2, n1, n1 + n2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bipartite_outcomes_rederive(seed in any::<u64>(), n1 in 20usize..80, n2 in 20usize..80, p in 0.3f64..0.9) {
        let g = random_bipartite(n1, n2, p, seed).unwrap();
        let (v1, v2) = sides(n1, n2);
        let params = DrcParams { d: 2, t: 2, s: 1, theta: 1.0, max_restarts: 20, ..DrcParams::default() };
        let out = drc_bipartite(&g, &v1, &v2, &params, seed).unwrap();
        prop_assert!(reverify_single(&g, &v1, &v2, &params, &out).unwrap());
        let a = &out.sets[0];
        prop_assert!(a.is_subset_of(&v2));
        let x = &out.stages[0].witness[0];
        let expected: Vec<usize> = v2.iter().filter(|&v| common::codegree(&g, x, &[v]) == 1).collect();
        prop_assert_eq!(a.to_vec(), expected);
    }

    #[test]
    fn general_outcomes_rederive(seed in any::<u64>(), n in 30usize..90, p in 0.4f64..0.9) {
        let g = random_graph(n, p, seed).unwrap();
        let all = VertexSet::full(n);
        let alpha = p / 2.0;
        let theta = 0.25 * alpha * n as f64;
        let params = DrcParams { d: 1, t: 2, s: 1, theta, alpha, eta: 0.25, max_restarts: 20, ..DrcParams::default() };
        let out = drc_general(&g, &all, &all, &params, seed).unwrap();
        prop_assert!(reverify_single(&g, &all, &all, &params, &out).unwrap());
    }

    #[test]
    fn chains_are_nested(seed in any::<u64>(), m in 150usize..300, r in 1usize..4) {
        let c = random_coloring(m, seed);
        let params = DrcParams { d: 1, t: 0, s: 0, theta: 1.0, max_restarts: 10, ..DrcParams::default() };
        let out = drc_chain(&c, r, &params, seed).unwrap();
        prop_assert_eq!(out.sets.len(), r);
        for w in out.sets.windows(2) {
            prop_assert!(w[0].is_subset_of(&w[1]));
        }
    }

    #[test]
    fn restart_loops_ignore_worker_count(seed in any::<u64>(), n in 20usize..60) {
        let g = random_bipartite(n, n, 0.5, seed).unwrap();
        let (v1, v2) = sides(n, n);
        let mk = |exec| DrcParams {
            d: 2, t: 3, s: 1, theta: 1.0, eps: 0.2, max_restarts: 30,
            evaluator: Evaluator::default().with_exec(exec),
            ..DrcParams::default()
        };
        let a = drc_bipartite(&g, &v1, &v2, &mk(Exec::Sequential), seed).unwrap();
        let b = drc_bipartite(&g, &v1, &v2, &mk(Exec::Parallel), seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn transfer_gap_is_within_three_standard_errors() {
    let mut rng = common::seeded(5);
    for case in 0..5u64 {
        let n = 12;
        let g = common::gnp(n, 0.8, &mut rng);
        let a2 = common::set(n, &common::subset(n, 0.6, &mut rng));
        let v1 = VertexSet::full(n);
        let theta = rng.gen_range(1.0..4.0);
        let rep = defect_transfer_check(&g, &a2, &v1, 1, 1, 1, theta, 3000, case, &Evaluator::default()).unwrap();
        assert!(rep.within(3.0), "case {case}: {rep:?}");
    }
}
