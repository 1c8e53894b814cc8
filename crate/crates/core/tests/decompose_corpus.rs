mod common;

use proptest::prelude::*;
use ramsey_embed::decompose::{default_pad, forward_plan, split};
use ramsey_embed::graph::{degeneracy, greedy_color, is_proper_coloring, random_degenerate, star};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_matches_independent_peeling(seed in any::<u64>(), n in 1usize..400, d in 1usize..=5) {
        let h = random_degenerate(n, d, seed);
        let dg = degeneracy(&h);
        prop_assert!(dg.d <= d);
        let coloring = greedy_color(&h, &dg.ordering).unwrap();
        prop_assert!(is_proper_coloring(&h, &coloring));
        prop_assert!(coloring.iter().all(|&c| c <= dg.d));
        let part = split(&h, &coloring, d).unwrap();
        prop_assert_eq!(part.check_invariants(&h, d), Vec::<String>::new());
        prop_assert_eq!(&part.peel_sizes, &common::peel_sizes(&h, 4 * d));
        let covered: usize = (0..part.slots()).map(|s| part.slot_members(s).len()).sum();
        prop_assert_eq!(covered, n);
    }

    #[test]
    fn forward_tuples_point_later_or_to_dummies(seed in any::<u64>(), n in 1usize..300, d in 1usize..=4) {
        let h = random_degenerate(n, d, seed);
        let dg = degeneracy(&h);
        let part = split(&h, &greedy_color(&h, &dg.ordering).unwrap(), d).unwrap();
        let plan = forward_plan(&h, &part, default_pad(d)).unwrap();
        for x in 0..n {
            prop_assert_eq!(plan.tuples[x].len(), default_pad(d));
            let mut last = None;
            for &y in &plan.tuples[x] {
                if plan.is_dummy(y) {
                    continue;
                }
                prop_assert!(h.has_edge(x, y));
                prop_assert!(part.slot_of(y) > part.slot_of(x));
                let key = (part.slot_of(y), y);
                prop_assert!(last.map_or(true, |l| l < key));
                last = Some(key);
            }
            let later = h.neighbors(x).filter(|&y| part.slot_of(y) > part.slot_of(x)).count();
            prop_assert_eq!(plan.forward[x].len(), later);
        }
    }
}

#[test]
fn star_center_sits_below_its_leaves_only_when_heavy() {
    // A star with 4d or more leaves peels the leaves first.
    let h = star(12);
    let dg = degeneracy(&h);
    let part = split(&h, &greedy_color(&h, &dg.ordering).unwrap(), 1).unwrap();
    assert_eq!(part.k, 2);
    assert_eq!(part.layer_of[0].0, 1);
    assert!((1..13).all(|v| part.layer_of[v].0 == 0));
    assert_eq!(forward_plan(&h, &part, 4).unwrap().max_forward(), 1);
}

#[test]
fn small_pad_is_rejected() {
    let h = star(3);
    let part = split(&h, &[0, 1, 1, 1], 1).unwrap();
    assert!(forward_plan(&h, &part, 4).is_ok());
    assert!(forward_plan(&h, &part, 2).is_err());
}
