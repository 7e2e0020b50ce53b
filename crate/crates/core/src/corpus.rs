//! Seeded random tasks, graphs, partitions and weightings.
//!
//! Everything here is driven by a caller-supplied RNG so the property suites,
//! the acceptance harness and the benchmark draw reproducible corpora.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::abstraction::{ArmdpWeights, Partition, WfaWeights};
use crate::projection::Pattern;
use crate::rational::{ratio, Prob};
use crate::statespace::{self, ActionInfo, ExplicitMdp, Row, StateInfo};
use crate::task::{self, EffectOutcome, FactTable, GroundAction, PlanningTask, State};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskParams {
    pub max_facts: usize,
    pub max_actions: usize,
    /// Chance (in percent) that an action gets two or three outcomes.
    pub probabilistic_pct: u32,
    pub max_cost: u32,
}

impl TaskParams {
    pub fn classical(max_facts: usize, max_actions: usize) -> Self {
        TaskParams { max_facts, max_actions, probabilistic_pct: 0, max_cost: 1 }
    }

    pub fn probabilistic(max_facts: usize, max_actions: usize) -> Self {
        TaskParams { probabilistic_pct: 50, ..Self::classical(max_facts, max_actions) }
    }
}

fn subset<R: Rng>(rng: &mut R, n: usize, pct: u32) -> Vec<usize> {
    (0..n).filter(|_| rng.random_ratio(pct, 100)).collect()
}

/// Splits 1 into `k` positive rationals with a shared denominator.
fn split_unit<R: Rng>(rng: &mut R, k: usize) -> Vec<Prob> {
    let den = rng.random_range(k as i64..=k as i64 * 4);
    let mut cuts: Vec<i64> = Vec::new();
    while cuts.len() < k - 1 {
        let c = rng.random_range(1..den);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    cuts.push(den);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let p = ratio(c - prev, den);
            prev = c;
            p
        })
        .collect()
}

fn random_outcome<R: Rng>(rng: &mut R, n: usize, prob: Prob) -> EffectOutcome {
    let mut add = Vec::new();
    let mut del = Vec::new();
    for f in 0..n {
        match rng.random_range(0..10) {
            0 | 1 => add.push(f),
            2 | 3 => del.push(f),
            _ => {}
        }
    }
    EffectOutcome::new(add, del, prob)
}

/// A valid STRIPS task: positive preconditions, disjoint add and delete
/// lists per outcome, between one and three goal facts.
pub fn random_task<R: Rng>(rng: &mut R, params: &TaskParams) -> PlanningTask {
    let n = rng.random_range(2..=params.max_facts.max(2));
    let k = rng.random_range(1..=params.max_actions.max(1));
    let facts = FactTable::new((0..n).map(|i| format!("f{i}"))).expect("distinct names");
    let actions = (0..k)
        .map(|i| {
            let pre = subset(rng, n, 20);
            let outcomes = if rng.random_ratio(params.probabilistic_pct, 100) {
                let m = rng.random_range(2..=3);
                split_unit(rng, m).into_iter().map(|p| random_outcome(rng, n, p)).collect()
            } else {
                vec![random_outcome(rng, n, Prob::from_integer(1.into()))]
            };
            GroundAction { name: format!("a{i}"), pre, outcomes, cost: rng.random_range(1..=params.max_cost.max(1)) }
        })
        .collect();
    let init = State::from_bools((0..n).map(|_| rng.random_bool(0.5)));
    let mut goal: Vec<usize> = (0..n).collect();
    goal.shuffle(rng);
    goal.truncate(rng.random_range(1..=3.min(n)));
    goal.sort_unstable();
    let t = PlanningTask::new(facts, actions, init, goal);
    debug_assert!(task::validate(&t).is_valid(), "{}", task::validate(&t));
    t
}

/// Draws classical tasks until one has a reachable goal state.
pub fn random_solvable_task<R: Rng>(rng: &mut R, params: &TaskParams) -> PlanningTask {
    loop {
        let t = random_task(rng, &TaskParams { probabilistic_pct: 0, ..*params });
        let m = statespace::expand(&t, &statespace::default_gamma()).expect("small task");
        if !m.goal_states().is_empty() && !task::is_goal(&t.init, &t) {
            return t;
        }
    }
}

/// Each fact kept with probability 1/2; may be empty.
pub fn random_pattern<R: Rng>(rng: &mut R, width: usize) -> Pattern {
    Pattern::new(subset(rng, width, 50), width).expect("indices in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphParams {
    pub min_states: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub probabilistic: bool,
    /// Chance (in percent) that a state is a goal.
    pub goal_pct: u32,
}

impl GraphParams {
    pub fn new(max_states: usize, max_actions: usize, probabilistic: bool) -> Self {
        GraphParams { min_states: 2, max_states, max_actions, probabilistic, goal_pct: 25 }
    }
}

/// Explicit MDP over `s0..`, rooted at `s0`, with rewards equal to the mass
/// entering goal states.
pub fn random_graph<R: Rng>(rng: &mut R, params: &GraphParams) -> ExplicitMdp {
    let n = rng.random_range(params.min_states.max(2)..=params.max_states.max(params.min_states).max(2));
    let k = rng.random_range(1..=params.max_actions.max(1));
    let goal: Vec<bool> = (0..n).map(|_| rng.random_ratio(params.goal_pct, 100)).collect();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut out = Vec::new();
        for a in 0..k {
            if !rng.random_ratio(3, 5) {
                continue;
            }
            let succ = if params.probabilistic { rng.random_range(1..=3.min(n)) } else { 1 };
            let mut targets: Vec<usize> = (0..n).collect();
            targets.shuffle(rng);
            targets.truncate(succ);
            targets.sort_unstable();
            let successors: Vec<(usize, Prob)> = targets.into_iter().zip(split_unit(rng, succ)).collect();
            let reward = successors.iter().filter(|(t, _)| goal[*t]).map(|(_, p)| p).sum();
            out.push(Row { action: a, successors, reward });
        }
        rows.push(out);
    }
    ExplicitMdp {
        states: (0..n).map(|i| StateInfo { id: format!("s{i}"), label: format!("s{i}"), goal: goal[i] }).collect(),
        facts: None,
        vectors: None,
        actions: (0..k).map(|a| ActionInfo { name: format!("a{a}"), cost: 1 }).collect(),
        rows,
        init: 0,
        gamma: statespace::default_gamma(),
    }
}

/// Contiguous runs of a random permutation, each of size `1..=max_class`.
pub fn random_partition<R: Rng>(rng: &mut R, m: &ExplicitMdp, max_class: usize) -> Partition {
    let mut order: Vec<usize> = (0..m.num_states()).collect();
    order.shuffle(rng);
    let mut class_of = vec![0; order.len()];
    let (mut c, mut i) = (0, 0);
    while i < order.len() {
        let len = rng.random_range(1..=max_class.max(1)).min(order.len() - i);
        for &s in &order[i..i + len] {
            class_of[s] = c;
        }
        c += 1;
        i += len;
    }
    Partition::from_assignment(m, class_of).expect("every class nonempty")
}

/// At most `classes` nonempty classes chosen uniformly.
pub fn random_partition_into<R: Rng>(rng: &mut R, m: &ExplicitMdp, classes: usize) -> Partition {
    let n = m.num_states();
    let k = classes.clamp(1, n.max(1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut class_of = vec![0; n];
    for (i, &s) in order.iter().enumerate() {
        class_of[s] = if i < k { i } else { rng.random_range(0..k) };
    }
    Partition::from_assignment(m, class_of).expect("first k states seed the classes")
}

/// Distribution over a random nonempty subset of `support`, integer weights
/// normalised.
pub fn random_distribution<R: Rng>(rng: &mut R, support: &[usize]) -> BTreeMap<usize, Prob> {
    assert!(!support.is_empty());
    let mut weights: Vec<(usize, i64)> = support.iter().map(|&s| (s, rng.random_range(0..4))).collect();
    if weights.iter().all(|(_, w)| *w == 0) {
        let i = rng.random_range(0..weights.len());
        weights[i].1 = 1;
    }
    let total: i64 = weights.iter().map(|(_, w)| w).sum();
    weights.into_iter().filter(|(_, w)| *w > 0).map(|(s, w)| (s, ratio(w, total))).collect()
}

pub fn random_wfa_weights<R: Rng>(rng: &mut R, p: &Partition) -> WfaWeights {
    (0..p.num_classes()).map(|c| random_distribution(rng, p.members(c))).collect()
}

/// `ξ := ω` on every pair with an applicable member.
pub fn xi_from_omega(m: &ExplicitMdp, p: &Partition, w: &WfaWeights) -> ArmdpWeights {
    let mut out = ArmdpWeights::new();
    for (s, rows) in m.rows.iter().enumerate() {
        let c = p.class_of(s);
        for r in rows {
            out.entry((c, r.action)).or_insert_with(|| w[c].clone());
        }
    }
    out
}

/// Mass a row sends into `class`, summed directly from the successors so
/// oracles need not trust `Partition::class_mass`.
pub fn mass_into(row: &Row, p: &Partition, class: usize) -> Prob {
    row.successors.iter().filter(|(t, _)| p.class_of(*t) == class).map(|(_, q)| q.clone()).fold(Prob::zero(), |a, b| a + b)
}

/// Probabilistic graph of 5 to 10 states with sparse goals, split into at
/// most `classes` classes: the source of random interval abstractions.
pub fn random_interval_source<R: Rng>(rng: &mut R, classes: usize) -> (ExplicitMdp, Partition) {
    let params = GraphParams { min_states: 5, max_states: 10, max_actions: 2, probabilistic: true, goal_pct: 10 };
    let m = random_graph(rng, &params);
    let p = random_partition_into(rng, &m, classes);
    (m, p)
}
