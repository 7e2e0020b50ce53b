//! Pattern projections of planning tasks.
//!
//! A pattern keeps a subset of the facts; `project_state` restricts a state
//! vector to it. Projecting a task intersects every precondition and effect
//! with the pattern and drops actions whose projected effect is zero in every
//! outcome.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use crate::abstraction::check_no_ambiguity;
use crate::rational::Prob;
use crate::report::CheckReport;
use crate::statespace::{self, ExpandError, ExplicitMdp};
use crate::task::{self, EffectOutcome, FactTable, GroundAction, PlanningTask, State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("unknown fact `{0}` in pattern")]
    UnknownFact(String),
    #[error("fact index {index} out of range for {width} facts")]
    OutOfRange { index: usize, width: usize },
    #[error("fact `{0}` appears twice in pattern")]
    Duplicate(String),
}

/// Ordered subset of a task's facts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    facts: Vec<usize>,
}

impl Pattern {
    pub fn new(facts: Vec<usize>, width: usize) -> Result<Self, PatternError> {
        let mut seen = BTreeSet::new();
        for &f in &facts {
            if f >= width {
                return Err(PatternError::OutOfRange { index: f, width });
            }
            if !seen.insert(f) {
                return Err(PatternError::Duplicate(f.to_string()));
            }
        }
        Ok(Pattern { facts })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S], table: &FactTable) -> Result<Self, PatternError> {
        let mut facts = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let i = table.lookup(n).ok_or_else(|| PatternError::UnknownFact(n.to_string()))?;
            if facts.contains(&i) {
                return Err(PatternError::Duplicate(n.to_string()));
            }
            facts.push(i);
        }
        Ok(Pattern { facts })
    }

    /// Accepts a comma-separated list of fact names or of indices.
    pub fn parse(text: &str, table: &FactTable) -> Result<Self, PatternError> {
        let items = task::split_fact_list(text);
        if !items.is_empty() && items.iter().all(|s| s.parse::<usize>().is_ok()) {
            let idx = items.iter().map(|s| s.parse().unwrap()).collect();
            return Pattern::new(idx, table.len());
        }
        Pattern::from_names(&items, table)
    }

    pub fn all(width: usize) -> Self {
        Pattern { facts: (0..width).collect() }
    }

    pub fn empty() -> Self {
        Pattern { facts: Vec::new() }
    }

    pub fn facts(&self) -> &[usize] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Position of concrete fact `f` inside the pattern.
    pub fn position(&self, f: usize) -> Option<usize> {
        self.facts.iter().position(|&x| x == f)
    }

    pub fn contains(&self, f: usize) -> bool {
        self.facts.contains(&f)
    }

    pub fn names(&self, table: &FactTable) -> Vec<String> {
        self.facts.iter().map(|&f| table.name(f).to_string()).collect()
    }

    fn project_list(&self, list: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = list.iter().filter_map(|&f| self.position(f)).collect();
        out.sort_unstable();
        out
    }
}

pub fn project_state(s: &State, p: &Pattern) -> State {
    State::from_bools(p.facts.iter().map(|&f| s.get(f)))
}

/// Restriction of a signed vector to the pattern.
pub fn project_vector(v: &[i32], p: &Pattern) -> Vec<i32> {
    p.facts.iter().map(|&f| v[f]).collect()
}

fn project_outcome(o: &EffectOutcome, p: &Pattern) -> EffectOutcome {
    EffectOutcome::new(p.project_list(&o.add), p.project_list(&o.del), o.prob.clone())
}

/// Projected task; facts are renumbered in pattern order.
pub fn project_task(t: &PlanningTask, p: &Pattern) -> PlanningTask {
    let facts = FactTable::new(p.facts.iter().map(|&f| t.facts.name(f).to_string())).expect("pattern names unique");
    let mut actions = Vec::new();
    for a in &t.actions {
        let outcomes: Vec<EffectOutcome> = a.outcomes.iter().map(|o| project_outcome(o, p)).collect();
        let width = p.len();
        let annihilated = outcomes.iter().all(|o| task::effect_delta(o, width).iter().all(|&d| d == 0));
        if annihilated {
            continue;
        }
        actions.push(GroundAction { name: a.name.clone(), pre: p.project_list(&a.pre), outcomes, cost: a.cost });
    }
    let init = project_state(&t.init, p);
    let goal = p.project_list(&t.goal);
    PlanningTask::new(facts, actions, init, goal)
}

/// Reachable state space of the projected task.
pub fn abstract_graph(at: &PlanningTask, gamma: &Prob) -> Result<ExplicitMdp, ExpandError> {
    statespace::expand(at, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// States reachable from the initial state.
    Reachable,
    /// Every assignment of the task's facts; limited to 20 facts.
    AllStates,
    Random { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearityCounterexample {
    pub state: State,
    pub action: String,
    pub outcome: usize,
    pub projected_successor: State,
    pub linear_prediction: State,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearityVerdict {
    /// Number of applicable (state, action, outcome) triples checked.
    pub checked: usize,
    pub counterexample: Option<LinearityCounterexample>,
}

impl LinearityVerdict {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn to_report(&self) -> CheckReport {
        const PROPERTY: &str = "alpha(apply(s, a, o)) = clamp(alpha(s) + alpha(delta(o))) for every applicable (s, a, o)";
        match &self.counterexample {
            None => CheckReport::pass("linearity", PROPERTY).with_details(serde_json::json!({"checked": self.checked})),
            Some(c) => CheckReport::fail(
                "linearity",
                PROPERTY,
                serde_json::json!({
                    "state": c.state.to_string(),
                    "action": c.action,
                    "outcome": c.outcome,
                    "projected_successor": c.projected_successor.to_string(),
                    "linear_prediction": c.linear_prediction.to_string(),
                }),
            ),
        }
    }
}

const MAX_ENUMERATED_FACTS: usize = 20;

fn sample_states(t: &PlanningTask, sampling: Sampling) -> Result<Vec<State>, ExpandError> {
    let w = t.width();
    Ok(match sampling {
        Sampling::Reachable => {
            let m = statespace::expand(t, &statespace::default_gamma())?;
            m.vectors.expect("expanded tasks carry vectors")
        }
        Sampling::AllStates => {
            assert!(w <= MAX_ENUMERATED_FACTS, "exhaustive enumeration limited to {MAX_ENUMERATED_FACTS} facts");
            (0..1u64 << w).map(|c| State::from_index(w, c)).collect()
        }
        Sampling::Random { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples).map(|_| State::from_bools((0..w).map(|_| rng.random_bool(0.5)))).collect()
        }
    })
}

/// Checks `alpha(apply(s, a, o)) == clamp(alpha(s) + alpha(delta(o)))`.
pub fn check_linearity(t: &PlanningTask, p: &Pattern, sampling: Sampling) -> Result<LinearityVerdict, ExpandError> {
    let states = sample_states(t, sampling)?;
    let w = t.width();
    let mut checked = 0;
    for s in &states {
        let abs = project_state(s, p).as_signed();
        for a in &t.actions {
            if !task::applicable(s, a).expect("pattern within width") {
                continue;
            }
            for (oi, o) in a.outcomes.iter().enumerate() {
                checked += 1;
                let lhs = project_state(&task::apply(s, a, o).expect("applicable"), p);
                let delta = project_vector(&task::effect_delta(o, w), p);
                let sum: Vec<i32> = abs.iter().zip(&delta).map(|(x, d)| x + d).collect();
                let rhs = task::clamp(&sum);
                if lhs != rhs {
                    return Ok(LinearityVerdict {
                        checked,
                        counterexample: Some(LinearityCounterexample {
                            state: s.clone(),
                            action: a.name.clone(),
                            outcome: oi,
                            projected_successor: lhs,
                            linear_prediction: rhs,
                        }),
                    });
                }
            }
        }
    }
    Ok(LinearityVerdict { checked, counterexample: None })
}
