mod common;

use proptest::prelude::*;
use rand::Rng as _;
use ramsey_embed::embed::{
    certificate_check, embed_one_side_bounded, random_greedy_embed, verify_embedding, Step,
};
use ramsey_embed::graph::{complete_bipartite, random_bipartite, random_degenerate, VertexSet};
use ramsey_embed::drc::DrcParams;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_runs_are_sound(seed in any::<u64>(), n in 2usize..40, d in 1usize..=3, p in 0.3f64..1.0, slack in 0.05f64..0.9, padded in any::<bool>()) {
        let h = random_degenerate(n, d, seed);
        let mut rng = common::seeded(seed);
        let host_n = rng.gen_range(4 * n..12 * n);
        let g = common::gnp(host_n, p, &mut rng);
        let plan = common::corpus::random_plan(&h, host_n, padded.then_some(4 * d), slack, seed);
        for run_seed in 0..4 {
            let run = random_greedy_embed(&g, &plan, run_seed).unwrap();
            let clean = run.state.log.iter().all(|pl| pl.step.is_clean());
            prop_assert_eq!(run.success, clean);
            if let Some(map) = &run.embedding {
                prop_assert!(common::is_embedding(&h, &g, map));
                prop_assert!(verify_embedding(&h, &g, map).ok);
            }
            for pl in &run.state.log {
                if pl.step == Step::Empty {
                    prop_assert_eq!(pl.neighborhood, 0);
                    prop_assert!(pl.defect.is_infinite());
                }
            }
            let cert = certificate_check(&run.state, &plan, 1).unwrap();
            if cert.all_passed() && cert.preconditions_hold() {
                prop_assert!(run.success);
            }
            // Within a slot, placements are in non-increasing defect order, ties by id.
            let real: Vec<_> = run.state.log.iter().filter(|pl| pl.vertex < n && pl.step != Step::Inject).collect();
            for w in real.windows(2) {
                if w[0].slot == w[1].slot {
                    let ok = w[0].defect > w[1].defect || (w[0].defect == w[1].defect && w[0].vertex < w[1].vertex);
                    prop_assert!(ok, "{:?} then {:?}", w[0], w[1]);
                }
            }
        }
    }
}

#[test]
fn one_side_bounded_runs_verify() {
    let h = complete_bipartite(2, 12);
    let w2 = [0, 1];
    let w1: Vec<usize> = (2..14).collect();
    let mut ok = 0;
    for seed in 0..10 {
        let g = random_bipartite(96, 40, 0.6, seed).unwrap();
        let v1 = VertexSet::range(136, 0, 96);
        let v2 = VertexSet::range(136, 96, 136);
        let p = DrcParams { d: 2, alpha: 0.5, theta: 1.0, ..DrcParams::default() };
        let out = embed_one_side_bounded(&g, &v1, &v2, &h, &w1, &w2, 1.0, &p, seed).unwrap();
        if out.success {
            ok += 1;
            assert!(common::is_embedding(&h, &g, out.map.as_ref().unwrap()));
            assert!(out.feasibility_violations.is_empty());
        }
    }
    assert!(ok >= 8, "{ok}/10");
}
