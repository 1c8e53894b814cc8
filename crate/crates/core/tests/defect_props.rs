mod common;

use proptest::prelude::*;
use rand::Rng as _;
use ramsey_embed::defect::{count_low_codegree, defect, moment_exact, DefectParams, Evaluator};
use ramsey_embed::graph::Graph;
use ramsey_embed::Exec;

struct Instance {
    g: Graph,
    factors: Vec<Vec<usize>>,
    target: Vec<usize>,
    theta: f64,
    s: u32,
}

fn instance(seed: u64, n: usize, d: usize) -> Instance {
    let mut rng = common::seeded(seed);
    let p = rng.gen_range(0.2..0.95);
    let g = common::gnp(n, p, &mut rng);
    let factors = (0..d).map(|_| common::subset(n, rng.gen_range(0.2..0.8), &mut rng)).collect();
    let target = common::subset(n, rng.gen_range(0.3..1.0), &mut rng);
    let theta = rng.gen_range(0.5..n as f64);
    let s = rng.gen_range(0..=4);
    Instance { g, factors, target, theta, s }
}

fn sets(n: usize, f: &[Vec<usize>]) -> Vec<ramsey_embed::VertexSet> {
    f.iter().map(|x| common::set(n, x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_moment_equals_enumeration(seed in any::<u64>(), n in 3usize..=14, d in 1usize..=3) {
        let x = instance(seed, n, d);
        let params = DefectParams::new(x.theta, x.s, d).unwrap();
        let got = moment_exact(&x.g, &params, &sets(n, &x.factors), &common::set(n, &x.target)).unwrap();
        let want = common::moment(&x.g, x.theta, x.s, &x.factors, &x.target);
        prop_assert!(got.value == want || (got.value.is_nan() && want.is_nan()), "{} vs {}", got.value, want);
    }

    #[test]
    fn dropping_a_coordinate_never_raises_the_moment(seed in any::<u64>(), n in 3usize..=12, d in 1usize..=3) {
        let x = instance(seed, n, d);
        let shorter = common::moment(&x.g, x.theta, x.s, &x.factors[..d - 1], &x.target);
        let params = DefectParams::new(x.theta, x.s, d).unwrap();
        let full = moment_exact(&x.g, &params, &sets(n, &x.factors), &common::set(n, &x.target)).unwrap().value;
        prop_assert!(common::le(shorter, full), "{shorter} > {full}");
    }

    #[test]
    fn repeated_tuples_are_a_small_share(seed in any::<u64>(), n in 3usize..=12, d in 2usize..=3) {
        let x = instance(seed, n, d);
        let m = x.factors.iter().map(Vec::len).min().unwrap() as f64;
        let rep = common::repeated_power_sum(&x.g, x.theta, x.s, &x.factors, &x.target);
        let all = common::power_sum(&x.g, x.theta, x.s, &x.factors, &x.target);
        let bound = (d * (d - 1)) as f64 / (2.0 * m) * all;
        prop_assert!(common::le(rep, bound), "{rep} > {bound}");
    }

    #[test]
    fn low_codegree_count_is_below_the_moment(seed in any::<u64>(), n in 3usize..=12, d in 1usize..=2) {
        let x = instance(seed, n, d);
        let s = x.s.max(1);
        let v1 = x.factors[0].clone();
        let cube = vec![v1.clone(); d];
        let params = DefectParams::new(x.theta, s, d).unwrap();
        let count = count_low_codegree(&x.g, &params, &common::set(n, &v1), &common::set(n, &x.target)).unwrap();
        let bound = x.theta / (v1.len() as f64).powf(d as f64 / s as f64);
        prop_assert_eq!(count, common::count_below(&x.g, &cube, &x.target, bound));
        let mu = common::moment(&x.g, x.theta, s, &cube, &x.target);
        if mu.is_finite() && count > 0 {
            prop_assert!((count as f64) < mu, "{count} >= {mu}");
        }
        prop_assert!(count as f64 <= mu);
    }

    #[test]
    fn defect_is_monotone(seed in any::<u64>(), n in 3usize..=16) {
        let mut rng = common::seeded(seed);
        let g = common::gnp(n, rng.gen_range(0.2..0.9), &mut rng);
        let q: Vec<usize> = common::subset(n, 0.2, &mut rng);
        let mut q2 = q.clone();
        q2.extend(common::subset(n, 0.2, &mut rng));
        let t = common::subset(n, 0.8, &mut rng);
        let t2: Vec<usize> = t.iter().copied().filter(|_| rng.gen::<f64>() < 0.7).collect();
        let theta = rng.gen_range(0.5..n as f64);
        let theta2 = theta + rng.gen_range(0.0..4.0);
        let a = defect(&g, theta, &q, &common::set(n, &t)).unwrap();
        let b = defect(&g, theta2, &q2, &common::set(n, &t2)).unwrap();
        prop_assert!(a <= b, "{a} > {b}");
    }

    #[test]
    fn moment_is_monotone(seed in any::<u64>(), n in 3usize..=12, d in 1usize..=2) {
        let x = instance(seed, n, d);
        let mut rng = common::seeded(seed ^ 1);
        let s2 = x.s + rng.gen_range(0..3);
        let theta2 = x.theta + rng.gen_range(0.0..3.0);
        let t2: Vec<usize> = x.target.iter().copied().filter(|_| rng.gen::<f64>() < 0.7).collect();
        let fs = sets(n, &x.factors);
        let a = moment_exact(&x.g, &DefectParams::new(x.theta, x.s, d).unwrap(), &fs, &common::set(n, &x.target)).unwrap().value;
        let b = moment_exact(&x.g, &DefectParams::new(theta2, s2, d).unwrap(), &fs, &common::set(n, &t2)).unwrap().value;
        prop_assert!(common::le(a, b), "{a} > {b}");
    }

    #[test]
    fn sequential_and_parallel_agree(seed in any::<u64>(), n in 3usize..=14, d in 1usize..=3) {
        let x = instance(seed, n, d);
        let params = DefectParams::new(x.theta, x.s, d).unwrap();
        let (fs, t) = (sets(n, &x.factors), common::set(n, &x.target));
        let seq = Evaluator::default().with_exec(Exec::Sequential);
        let par = Evaluator::default().with_exec(Exec::Parallel);
        prop_assert_eq!(seq.moment_exact(&x.g, &params, &fs, &t).unwrap(), par.moment_exact(&x.g, &params, &fs, &t).unwrap());
        prop_assert_eq!(
            seq.moment_sampled(&x.g, &params, &fs, &t, 500, seed).unwrap(),
            par.moment_sampled(&x.g, &params, &fs, &t, 500, seed).unwrap()
        );
    }
}

#[test]
fn sampled_estimates_average_to_the_exact_moment() {
    let mut rng = common::seeded(77);
    let n = 18;
    let g = common::gnp(n, 0.6, &mut rng);
    let all: Vec<usize> = (0..n).collect();
    let fs = sets(n, &[all.clone(), all.clone()]);
    let t = common::set(n, &all);
    let params = DefectParams::new(6.0, 2, 2).unwrap();
    let exact = common::moment(&g, 6.0, 2, &[all.clone(), all], &(0..n).collect::<Vec<_>>());
    assert!(exact.is_finite() && exact > 0.0);
    let ev = Evaluator::default();
    let runs: Vec<_> = (0..50).map(|i| ev.moment_sampled(&g, &params, &fs, &t, 400, 1000 + i).unwrap()).collect();
    let mean = runs.iter().map(|r| r.value).sum::<f64>() / 50.0;
    let pooled = (runs.iter().map(|r| r.std_error.powi(2)).sum::<f64>()).sqrt() / 50.0;
    assert!((mean - exact).abs() <= 3.0 * pooled, "mean {mean}, exact {exact}, pooled se {pooled}");
}

#[test]
fn empty_host_makes_every_tuple_bad() {
    let g = Graph::empty(6);
    let v = common::set(6, &[0, 1, 2]);
    let params = DefectParams::new(1.0, 2, 2).unwrap();
    assert_eq!(count_low_codegree(&g, &params, &v, &common::set(6, &[3, 4, 5])).unwrap(), 9);
}
