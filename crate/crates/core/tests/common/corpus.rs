//! Randomized embedding inputs built with the library, and a tally of run outcomes.

use rand::seq::SliceRandom;
use rand::Rng as _;
use ramsey_embed::decompose::{forward_plan, split};
use ramsey_embed::embed::{certificate_check, random_greedy_embed, EmbedPlan, EmbedRun};
use ramsey_embed::graph::{degeneracy, greedy_color, Graph, VertexSet};

/// A plan whose slot targets are cut at random out of `0..host_n`, each at least as
/// large as its slot. Slot
/// thresholds are `max(2|W|, slack·|target|, 1)`. The pad is the tight forward degree
/// unless a larger one is given.
pub fn random_plan(h: &Graph, host_n: usize, pad: Option<usize>, slack: f64, seed: u64) -> EmbedPlan {
    let dg = degeneracy(h);
    let part = split(h, &greedy_color(h, &dg.ordering).unwrap(), dg.d.max(1)).unwrap();
    let tight = (0..h.n())
        .map(|x| h.neighbors(x).filter(|&y| part.slot_of(y) > part.slot_of(x)).count())
        .max()
        .unwrap_or(0);
    let fw = forward_plan(h, &part, pad.unwrap_or(tight).max(tight)).unwrap();
    let mut rng = super::seeded(seed);
    let slots = part.slots();
    // Every slot first gets as many host vertices as it has pattern vertices.
    let mut order: Vec<usize> = (0..host_n).collect();
    order.shuffle(&mut rng);
    let mut cells = vec![Vec::new(); slots];
    let mut next = order.into_iter();
    for (s, cell) in cells.iter_mut().enumerate() {
        cell.extend(next.by_ref().take(part.slot_members(s).len()));
    }
    for v in next {
        cells[rng.gen_range(0..slots)].push(v);
    }
    let targets: Vec<VertexSet> = cells.iter().map(|c| super::set(host_n, c)).collect();
    let thetas = (0..slots)
        .map(|s| (2.0 * part.slot_members(s).len() as f64).max(slack * cells[s].len() as f64).max(1.0))
        .collect();
    EmbedPlan::new(part, fw, targets, thetas).unwrap()
}

/// Outcomes of embedding runs, checked against the oracle as they are recorded.
#[derive(Default, Debug)]
pub struct Tally {
    pub runs: usize,
    pub successes: usize,
    /// Successful runs whose map the oracle rejects.
    pub unsound: usize,
    /// Runs whose certificate passed with its preconditions met.
    pub certified: usize,
    /// Certified runs that failed.
    pub certified_failures: usize,
}

impl Tally {
    pub fn record(&mut self, h: &Graph, g: &Graph, plan: &EmbedPlan, run: &EmbedRun) {
        self.runs += 1;
        if run.success {
            self.successes += 1;
            let map = run.embedding.as_deref().unwrap_or(&[]);
            if !super::is_embedding(h, g, map) {
                self.unsound += 1;
            }
        }
        let cert = certificate_check(&run.state, plan, 1).unwrap();
        if cert.all_passed() && cert.preconditions_hold() {
            self.certified += 1;
            if !run.success {
                self.certified_failures += 1;
            }
        }
    }

    pub fn run(&mut self, h: &Graph, g: &Graph, plan: &EmbedPlan, seed: u64) -> EmbedRun {
        let run = random_greedy_embed(g, plan, seed).unwrap();
        self.record(h, g, plan, &run);
        run
    }
}
