//! Grounded propositional planning tasks and their execution semantics.
//!
//! States are fixed-width bit vectors: bit `i` is fact `i` of the task's
//! [`FactTable`]. Effects follow delete-then-add, which coincides with the
//! clamped vector form `clamp(s + delta)` because an outcome never adds and
//! deletes the same fact.

use std::collections::HashMap;
use std::fmt;

use bitvec::prelude::*;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_rational, Prob};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("fact index {index} out of range for {width} facts")]
    FactOutOfRange { index: usize, width: usize },
    #[error("state width {state} does not match fact table width {facts}")]
    WidthMismatch { state: usize, facts: usize },
    #[error("action `{0}` is not applicable")]
    NotApplicable(String),
    #[error("duplicate fact name `{0}`")]
    DuplicateFact(String),
    #[error("empty fact name")]
    EmptyFact,
    #[error("unknown fact `{0}`")]
    UnknownFact(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
}

/// Ordered, unique proposition names. Index = bit position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FactTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl TryFrom<Vec<String>> for FactTable {
    type Error = TaskError;

    fn try_from(names: Vec<String>) -> Result<Self, TaskError> {
        FactTable::new(names)
    }
}

impl From<FactTable> for Vec<String> {
    fn from(t: FactTable) -> Self {
        t.names
    }
}

impl FactTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, TaskError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(TaskError::EmptyFact);
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(TaskError::DuplicateFact(n.clone()));
            }
        }
        Ok(FactTable { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// A binary state vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    bits: BitVec<u64, Lsb0>,
}

impl State {
    pub fn empty(width: usize) -> Self {
        State { bits: bitvec![u64, Lsb0; 0; width] }
    }

    pub fn from_facts(width: usize, facts: &[usize]) -> Result<Self, TaskError> {
        let mut s = Self::empty(width);
        for &f in facts {
            if f >= width {
                return Err(TaskError::FactOutOfRange { index: f, width });
            }
            s.bits.set(f, true);
        }
        Ok(s)
    }

    /// Parses a `0`/`1` string such as `10000101`, first character = fact 0.
    pub fn from_bit_str(text: &str) -> Option<Self> {
        let mut bits = BitVec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(State { bits })
    }

    pub fn from_bools(values: impl IntoIterator<Item = bool>) -> Self {
        State { bits: values.into_iter().collect() }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits.set(i, value);
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    /// Integer code with bit `i` of the vector as bit `i` of the integer.
    pub fn to_index(&self) -> u64 {
        assert!(self.width() <= 64, "state too wide for an integer code");
        self.bits.iter_ones().fold(0u64, |acc, i| acc | (1u64 << i))
    }

    pub fn from_index(width: usize, code: u64) -> Self {
        State::from_bools((0..width).map(|i| code >> i & 1 == 1))
    }

    pub fn as_signed(&self) -> Vec<i32> {
        self.bits.iter().map(|b| i32::from(*b)).collect()
    }

    /// Fact names set in this state, joined by commas.
    pub fn describe(&self, facts: &FactTable) -> String {
        self.ones().map(|i| facts.name(i)).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits.iter() {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State({self})")
    }
}

/// Splits a comma-separated fact list, ignoring commas inside parentheses.
pub fn split_fact_list(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(text[start..].trim());
    out.retain(|s| !s.is_empty());
    out
}

/// Clamps every component of a signed vector into `{0, 1}`.
pub fn clamp(v: &[i32]) -> State {
    State::from_bools(v.iter().map(|&x| x >= 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectOutcome {
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    #[serde(with = "crate::rational::serde_str")]
    pub prob: Prob,
}

impl EffectOutcome {
    pub fn new(mut add: Vec<usize>, mut del: Vec<usize>, prob: Prob) -> Self {
        add.sort_unstable();
        add.dedup();
        del.sort_unstable();
        del.dedup();
        EffectOutcome { add, del, prob }
    }

    pub fn certain(add: Vec<usize>, del: Vec<usize>) -> Self {
        Self::new(add, del, Prob::one())
    }

    pub fn is_empty(&self) -> bool {
        self.add.is_empty() && self.del.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundAction {
    pub name: String,
    pub pre: Vec<usize>,
    pub outcomes: Vec<EffectOutcome>,
    pub cost: u32,
}

impl GroundAction {
    pub fn classical(name: impl Into<String>, pre: Vec<usize>, add: Vec<usize>, del: Vec<usize>) -> Self {
        GroundAction { name: name.into(), pre, outcomes: vec![EffectOutcome::certain(add, del)], cost: 1 }
    }

    pub fn is_classical(&self) -> bool {
        self.outcomes.len() == 1 && self.outcomes[0].prob.is_one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Classical,
    Probabilistic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanningTask {
    pub facts: FactTable,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: Vec<usize>,
    pub flavor: Flavor,
}

impl PlanningTask {
    /// Builds a task and infers its flavor from the action outcomes.
    pub fn new(facts: FactTable, actions: Vec<GroundAction>, init: State, goal: Vec<usize>) -> Self {
        let flavor = if actions.iter().all(GroundAction::is_classical) {
            Flavor::Classical
        } else {
            Flavor::Probabilistic
        };
        PlanningTask { facts, actions, init, goal, flavor }
    }

    pub fn width(&self) -> usize {
        self.facts.len()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn state_from_names(&self, names: &[&str]) -> Result<State, TaskError> {
        let idx = names
            .iter()
            .map(|n| self.facts.lookup(n).ok_or_else(|| TaskError::UnknownFact(n.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        State::from_facts(self.width(), &idx)
    }
}

/// A plan: an ordered list of action names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSequence {
    pub steps: Vec<String>,
}

impl ActionSequence {
    /// Checks that every step names an action of `task`.
    pub fn resolve(&self, task: &PlanningTask) -> Result<Vec<usize>, TaskError> {
        self.steps
            .iter()
            .map(|s| task.action_index(s).ok_or_else(|| TaskError::UnknownAction(s.clone())))
            .collect()
    }

    pub fn cost(&self, task: &PlanningTask) -> Result<u64, TaskError> {
        Ok(self.resolve(task)?.into_iter().map(|i| u64::from(task.actions[i].cost)).sum())
    }
}

fn check_index(i: usize, width: usize) -> Result<(), TaskError> {
    if i < width {
        Ok(())
    } else {
        Err(TaskError::FactOutOfRange { index: i, width })
    }
}

pub fn applicable(s: &State, a: &GroundAction) -> Result<bool, TaskError> {
    let width = s.width();
    for &p in &a.pre {
        check_index(p, width)?;
    }
    Ok(a.pre.iter().all(|&p| s.get(p)))
}

/// Successor under outcome `o`: `o.del` cleared, then `o.add` set.
pub fn apply(s: &State, a: &GroundAction, o: &EffectOutcome) -> Result<State, TaskError> {
    if !applicable(s, a)? {
        return Err(TaskError::NotApplicable(a.name.clone()));
    }
    let width = s.width();
    let mut next = s.clone();
    for &d in &o.del {
        check_index(d, width)?;
        next.set(d, false);
    }
    for &ad in &o.add {
        check_index(ad, width)?;
        next.set(ad, true);
    }
    Ok(next)
}

/// Signed effect vector: `+1` on add facts, `-1` on delete facts.
pub fn effect_delta(o: &EffectOutcome, width: usize) -> Vec<i32> {
    let mut v = vec![0; width];
    for &d in &o.del {
        v[d] -= 1;
    }
    for &a in &o.add {
        v[a] += 1;
    }
    v
}

pub fn is_goal(s: &State, t: &PlanningTask) -> bool {
    t.goal.iter().all(|&g| g < s.width() && s.get(g))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failures.is_empty() {
            return f.write_str("valid");
        }
        f.write_str(&self.failures.join("; "))
    }
}

pub fn validate(t: &PlanningTask) -> ValidationReport {
    let width = t.width();
    let mut failures = Vec::new();
    if t.init.width() != width {
        failures.push(format!("initial state has width {} but there are {} facts", t.init.width(), width));
    }
    for &g in &t.goal {
        if g >= width {
            failures.push(format!("goal fact index {g} out of range ({width} facts)"));
        }
    }
    let mut names = std::collections::HashSet::new();
    for a in &t.actions {
        if !names.insert(a.name.as_str()) {
            failures.push(format!("duplicate action name `{}`", a.name));
        }
        if a.cost == 0 {
            failures.push(format!("action `{}` has non-positive cost", a.name));
        }
        for &p in &a.pre {
            if p >= width {
                failures.push(format!("action `{}`: precondition index {p} out of range ({width} facts)", a.name));
            }
        }
        if a.outcomes.is_empty() {
            failures.push(format!("action `{}` has no outcomes", a.name));
            continue;
        }
        let mut total = Prob::zero();
        for (k, o) in a.outcomes.iter().enumerate() {
            if o.prob <= Prob::zero() || o.prob > Prob::one() {
                failures.push(format!("action `{}`: outcome {k} has probability {}", a.name, format_rational(&o.prob)));
            }
            total += &o.prob;
            for &i in o.add.iter().chain(&o.del) {
                if i >= width {
                    failures.push(format!("action `{}`: effect index {i} out of range ({width} facts)", a.name));
                }
            }
            if o.add.iter().any(|x| o.del.contains(x)) {
                failures.push(format!("action `{}`: outcome {k} adds and deletes the same fact", a.name));
            }
        }
        if !total.is_one() {
            failures.push(format!("action `{}`: probabilities sum to {}", a.name, format_rational(&total)));
        }
    }
    let classical = t.actions.iter().all(GroundAction::is_classical);
    if classical != (t.flavor == Flavor::Classical) {
        failures.push(format!("flavor {:?} inconsistent with action outcomes", t.flavor));
    }
    ValidationReport { failures }
}
