//! Explicit MDPs: breadth-first expansion of planning tasks and a JSON
//! graph format for hand-drawn instances.
//!
//! Rewards are the probability mass entering goal states,
//! `R(s, a) = sum of T(s' | s, a) over goal s'`, so a deterministic action
//! landing on a goal earns exactly 1. Goals are not made absorbing here;
//! solvers do that on request.

mod graph;

pub use graph::{load_graph, to_graph_json, GraphError};

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{format_rational, ratio, Prob};
use crate::task::{self, FactTable, PlanningTask, State, ValidationReport};

pub const DEFAULT_STATE_CAP: usize = 1 << 20;
pub const DEFAULT_GAMMA: (i64, i64) = (9, 10);

pub fn default_gamma() -> Prob {
    ratio(DEFAULT_GAMMA.0, DEFAULT_GAMMA.1)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("task is invalid: {0}")]
    InvalidTask(ValidationReport),
    #[error("state space exceeds the cap of {cap} states")]
    StateCap { cap: usize },
    #[error("discount {0} is outside [0, 1)")]
    BadDiscount(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateInfo {
    pub id: String,
    pub label: String,
    pub goal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionInfo {
    pub name: String,
    pub cost: u32,
}

/// Outgoing distribution of one applicable (state, action) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub action: usize,
    /// Successor indices in increasing order, each with positive mass.
    pub successors: Vec<(usize, Prob)>,
    pub reward: Prob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitMdp {
    pub states: Vec<StateInfo>,
    pub facts: Option<FactTable>,
    /// Bit vector of each state when the facts are known.
    pub vectors: Option<Vec<State>>,
    pub actions: Vec<ActionInfo>,
    /// Rows of each state, sorted by action index. Absent = inapplicable.
    pub rows: Vec<Vec<Row>>,
    pub init: usize,
    pub gamma: Prob,
}

impl ExplicitMdp {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn row(&self, s: usize, a: usize) -> Option<&Row> {
        let rows = &self.rows[s];
        rows.binary_search_by_key(&a, |r| r.action).ok().map(|i| &rows[i])
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn is_goal(&self, s: usize) -> bool {
        self.states[s].goal
    }

    pub fn goal_states(&self) -> Vec<usize> {
        (0..self.num_states()).filter(|&s| self.is_goal(s)).collect()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Directed `(from, action, to)` edges with positive mass, self-loops excluded.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (s, rows) in self.rows.iter().enumerate() {
            for r in rows {
                for (t, _) in &r.successors {
                    if *t != s {
                        out.push((s, r.action, *t));
                    }
                }
            }
        }
        out
    }

    /// True iff every row has a single successor with probability 1.
    pub fn is_deterministic(&self) -> bool {
        self.rows.iter().flatten().all(|r| r.successors.len() == 1 && r.successors[0].1.is_one())
    }

    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        if start >= self.num_states() {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(s) = queue.pop_front() {
            for r in &self.rows[s] {
                for (t, _) in &r.successors {
                    if !seen[*t] {
                        seen[*t] = true;
                        queue.push_back(*t);
                    }
                }
            }
        }
        seen
    }

    /// Structural invariants; `require_reachable` adds the all-reachable check.
    pub fn check_invariants(&self, require_reachable: bool) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.num_states();
        if self.rows.len() != n {
            out.push(format!("{} row lists for {} states", self.rows.len(), n));
            return out;
        }
        if n > 0 && self.init >= n {
            out.push(format!("initial state {} out of range", self.init));
        }
        for (s, rows) in self.rows.iter().enumerate() {
            for w in rows.windows(2) {
                if w[0].action >= w[1].action {
                    out.push(format!("rows of state {} not strictly sorted by action", self.states[s].id));
                }
            }
            for r in rows {
                let total: Prob = r.successors.iter().map(|(_, p)| p).sum();
                if !total.is_one() {
                    out.push(format!(
                        "row ({}, {}) sums to {}",
                        self.states[s].id,
                        self.actions[r.action].name,
                        format_rational(&total)
                    ));
                }
                if r.successors.iter().any(|(t, p)| *t >= n || *p <= Prob::zero()) {
                    out.push(format!("row ({}, {}) has an invalid successor", self.states[s].id, self.actions[r.action].name));
                }
            }
        }
        if require_reachable && n > 0 {
            let seen = self.reachable_from(self.init);
            for (s, ok) in seen.iter().enumerate() {
                if !ok {
                    out.push(format!("state {} is unreachable", self.states[s].id));
                }
            }
        }
        out
    }
}

/// Breadth-first closure of the states reachable from the task's initial state.
pub fn expand(t: &PlanningTask, gamma: &Prob) -> Result<ExplicitMdp, ExpandError> {
    expand_with_cap(t, gamma, DEFAULT_STATE_CAP)
}

pub fn expand_with_cap(t: &PlanningTask, gamma: &Prob, cap: usize) -> Result<ExplicitMdp, ExpandError> {
    let report = task::validate(t);
    if !report.is_valid() {
        return Err(ExpandError::InvalidTask(report));
    }
    if *gamma < Prob::zero() || *gamma >= Prob::one() {
        return Err(ExpandError::BadDiscount(format_rational(gamma)));
    }
    let mut index: HashMap<State, usize> = HashMap::new();
    let mut vectors = vec![t.init.clone()];
    index.insert(t.init.clone(), 0);
    let mut rows: Vec<Vec<Row>> = Vec::new();
    let mut frontier = 0;
    while frontier < vectors.len() {
        let s = vectors[frontier].clone();
        let mut out = Vec::new();
        for (ai, a) in t.actions.iter().enumerate() {
            if !task::applicable(&s, a).expect("validated") {
                continue;
            }
            let mut mass: BTreeMap<usize, Prob> = BTreeMap::new();
            for o in &a.outcomes {
                let next = task::apply(&s, a, o).expect("applicable");
                let id = match index.get(&next) {
                    Some(&i) => i,
                    None => {
                        if vectors.len() >= cap {
                            return Err(ExpandError::StateCap { cap });
                        }
                        let i = vectors.len();
                        index.insert(next.clone(), i);
                        vectors.push(next);
                        i
                    }
                };
                *mass.entry(id).or_insert_with(Prob::zero) += &o.prob;
            }
            let successors: Vec<(usize, Prob)> = mass.into_iter().collect();
            let reward = successors
                .iter()
                .filter(|(i, _)| task::is_goal(&vectors[*i], t))
                .fold(Prob::zero(), |acc, (_, p)| acc + p);
            out.push(Row { action: ai, successors, reward });
        }
        rows.push(out);
        frontier += 1;
    }
    let states = vectors
        .iter()
        .map(|v| StateInfo { id: v.to_string(), label: v.describe(&t.facts), goal: task::is_goal(v, t) })
        .collect();
    Ok(ExplicitMdp {
        states,
        facts: Some(t.facts.clone()),
        vectors: Some(vectors),
        actions: t.actions.iter().map(|a| ActionInfo { name: a.name.clone(), cost: a.cost }).collect(),
        rows,
        init: 0,
        gamma: gamma.clone(),
    })
}
