//! State aggregation of explicit MDPs.
//!
//! A [`Partition`] groups concrete states into abstract classes. From it the
//! three weighted constructions are built: a weighting-function abstraction
//! (one distribution per class), an abstract robust MDP (one distribution per
//! class and action) and an abstract bounded-parameter MDP (probability
//! intervals). The checkers compare these against each other and against the
//! projected planning task.

mod build;
mod checks;
mod csets;
mod suite;

pub use build::{
    build_abpmdp, build_armdp, build_wfa, build_wfa_with, default_xi, default_xi_with, select_max, ArmdpWeights, WfaWeights,
    XiChoice,
};
pub use checks::{
    check_connection_preserving, check_deterministic, check_equivalence, check_no_ambiguity,
    check_representative_independence,
};
pub use csets::{compute_csets, wfa_feasibility, CSetIndex, ClassConflict, WfaFeasibility};
pub use suite::{
    check_framework, check_framework_equivalence, check_partition_properties, check_wfa_feasibility, framework_model,
    weights_json, xi_json, Framework,
};

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::projection::{project_state, Pattern};
use crate::rational::Prob;
use crate::statespace::{ActionInfo, ExplicitMdp, Row, StateInfo};
use crate::task::State;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbstractionError {
    #[error("partition has {got} entries for {expected} states")]
    SizeMismatch { expected: usize, got: usize },
    #[error("class {0} has no members")]
    EmptyClass(usize),
    #[error("the MDP carries no state vectors, so it cannot be projected")]
    NoVectors,
    #[error("projected state {0} is missing from the abstract graph")]
    MissingAbstractState(String),
    #[error("action `{action}` from {sbar} reaches different member sets per target class: {detail}")]
    Ambiguous { sbar: String, action: String, detail: String },
    #[error("upper bounds of ({sbar}, {action}) sum to {sum}, not 1")]
    NonRepresentable { sbar: String, action: String, sum: String },
    #[error("operation needs a point-valued abstract MDP")]
    NotPointValued,
    #[error("operation needs an interval-valued abstract MDP")]
    NotIntervalValued,
}

/// Assignment of every concrete state to one abstract class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    names: Vec<String>,
    labels: Vec<String>,
    goal: Vec<bool>,
}

pub fn class_name(k: usize) -> String {
    format!("s\u{304}{k}")
}

impl Partition {
    /// `class_of[s]` is the class of state `s`; ids must be `0..k` with no gaps.
    /// A class is a goal class when any member is a goal.
    pub fn from_assignment(m: &ExplicitMdp, class_of: Vec<usize>) -> Result<Self, AbstractionError> {
        if class_of.len() != m.num_states() {
            return Err(AbstractionError::SizeMismatch { expected: m.num_states(), got: class_of.len() });
        }
        let k = class_of.iter().max().map_or(0, |c| c + 1);
        let mut members = vec![Vec::new(); k];
        for (s, &c) in class_of.iter().enumerate() {
            members[c].push(s);
        }
        if let Some(c) = members.iter().position(Vec::is_empty) {
            return Err(AbstractionError::EmptyClass(c));
        }
        let goal = members.iter().map(|ms| ms.iter().any(|&s| m.is_goal(s))).collect();
        let labels = members.iter().map(|ms| ms.iter().map(|&s| m.states[s].id.as_str()).collect::<Vec<_>>().join(",")).collect();
        Ok(Partition { class_of, members, names: (0..k).map(class_name).collect(), labels, goal })
    }

    /// Classes by projected vector, numbered in order of first appearance.
    pub fn by_pattern(m: &ExplicitMdp, p: &Pattern) -> Result<Self, AbstractionError> {
        let vectors = m.vectors.as_ref().ok_or(AbstractionError::NoVectors)?;
        let mut ids: HashMap<State, usize> = HashMap::new();
        let mut order = Vec::new();
        let class_of = vectors
            .iter()
            .map(|v| {
                let a = project_state(v, p);
                let next = ids.len();
                *ids.entry(a.clone()).or_insert_with(|| {
                    order.push(a);
                    next
                })
            })
            .collect();
        let mut part = Partition::from_assignment(m, class_of)?;
        part.labels = order.iter().map(|v| v.to_string()).collect();
        Ok(part)
    }

    /// Classes numbered like the states of `abstract_graph`, whose goal flags
    /// they take over.
    pub fn from_projection(m: &ExplicitMdp, p: &Pattern, abstract_graph: &ExplicitMdp) -> Result<Self, AbstractionError> {
        let vectors = m.vectors.as_ref().ok_or(AbstractionError::NoVectors)?;
        let avecs = abstract_graph.vectors.as_ref().ok_or(AbstractionError::NoVectors)?;
        let index: HashMap<&State, usize> = avecs.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut class_of = Vec::with_capacity(vectors.len());
        for v in vectors {
            let a = project_state(v, p);
            let c = *index.get(&a).ok_or_else(|| AbstractionError::MissingAbstractState(a.to_string()))?;
            class_of.push(c);
        }
        let k = avecs.len();
        let mut members = vec![Vec::new(); k];
        for (s, &c) in class_of.iter().enumerate() {
            members[c].push(s);
        }
        Ok(Partition {
            class_of,
            members,
            names: (0..k).map(class_name).collect(),
            labels: abstract_graph.states.iter().map(|s| s.id.clone()).collect(),
            goal: abstract_graph.states.iter().map(|s| s.goal).collect(),
        })
    }

    pub fn identity(m: &ExplicitMdp) -> Self {
        Partition::from_assignment(m, (0..m.num_states()).collect()).expect("identity partition")
    }

    pub fn num_classes(&self) -> usize {
        self.members.len()
    }

    pub fn class_of(&self, s: usize) -> usize {
        self.class_of[s]
    }

    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    pub fn name(&self, c: usize) -> &str {
        &self.names[c]
    }

    pub fn label(&self, c: usize) -> &str {
        &self.labels[c]
    }

    pub fn is_goal(&self, c: usize) -> bool {
        self.goal[c]
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Mass of `row` entering each class.
    pub fn class_mass(&self, row: &Row) -> BTreeMap<usize, Prob> {
        let mut out: BTreeMap<usize, Prob> = BTreeMap::new();
        for (t, p) in &row.successors {
            *out.entry(self.class_of[*t]).or_insert_with(Prob::zero) += p;
        }
        out
    }

    fn abstract_states(&self) -> Vec<StateInfo> {
        (0..self.num_classes())
            .map(|c| StateInfo { id: self.names[c].clone(), label: self.labels[c].clone(), goal: self.goal[c] })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Wfa,
    Armdp,
    Abpmdp,
    AbpmdpMax,
    Planning,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Wfa => "wfa",
            Provenance::Armdp => "armdp",
            Provenance::Abpmdp => "abpmdp",
            Provenance::AbpmdpMax => "abpmdp-max",
            Provenance::Planning => "planning",
        }
    }
}

/// Interval row: for each target class, `(class, lower, upper)` with `upper > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalRow {
    pub action: usize,
    pub successors: Vec<(usize, Prob, Prob)>,
    pub reward: (Prob, Prob),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transitions {
    Point(Vec<Vec<Row>>),
    Interval(Vec<Vec<IntervalRow>>),
}

/// Abstract model over the classes of a partition. Point rows may carry
/// less than unit mass when the weights sit partly on members where the
/// action is inapplicable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractMdp {
    pub states: Vec<StateInfo>,
    pub actions: Vec<ActionInfo>,
    pub transitions: Transitions,
    pub init: usize,
    pub gamma: Prob,
    pub provenance: Provenance,
}

impl AbstractMdp {
    /// Wraps the state space of a projected task.
    pub fn from_planning(g: &ExplicitMdp) -> Self {
        AbstractMdp {
            states: g
                .states
                .iter()
                .enumerate()
                .map(|(i, s)| StateInfo { id: class_name(i), label: s.id.clone(), goal: s.goal })
                .collect(),
            actions: g.actions.clone(),
            transitions: Transitions::Point(g.rows.clone()),
            init: g.init,
            gamma: g.gamma.clone(),
            provenance: Provenance::Planning,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn point_rows(&self) -> Option<&[Vec<Row>]> {
        match &self.transitions {
            Transitions::Point(r) => Some(r),
            Transitions::Interval(_) => None,
        }
    }

    pub fn interval_rows(&self) -> Option<&[Vec<IntervalRow>]> {
        match &self.transitions {
            Transitions::Interval(r) => Some(r),
            Transitions::Point(_) => None,
        }
    }

    pub fn point_row(&self, s: usize, a: usize) -> Option<&Row> {
        let rows = &self.point_rows()?[s];
        rows.binary_search_by_key(&a, |r| r.action).ok().map(|i| &rows[i])
    }

    pub fn interval_row(&self, s: usize, a: usize) -> Option<&IntervalRow> {
        let rows = &self.interval_rows()?[s];
        rows.binary_search_by_key(&a, |r| r.action).ok().map(|i| &rows[i])
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }

    /// Point-valued model as an explicit MDP (for the solvers).
    pub fn to_explicit(&self) -> Result<ExplicitMdp, AbstractionError> {
        let rows = self.point_rows().ok_or(AbstractionError::NotPointValued)?;
        Ok(ExplicitMdp {
            states: self.states.clone(),
            facts: None,
            vectors: None,
            actions: self.actions.clone(),
            rows: rows.to_vec(),
            init: self.init,
            gamma: self.gamma.clone(),
        })
    }
}
