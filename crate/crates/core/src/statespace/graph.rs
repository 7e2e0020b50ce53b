//! JSON graph format.
//!
//! ```json
//! {"facts": ["p1", "p2"], "init": "s1",
//!  "states": [{"id": "s1", "label": "p2", "goal": false}, ...],
//!  "actions": ["a", "b"],
//!  "transitions": [{"from": "s6", "action": "a", "to": [["s3", "1"]]}, ...],
//!  "gamma": "9/10"}
//! ```
//!
//! Probabilities are exact rationals written as strings (plain JSON numbers
//! are accepted on input). `facts`, `init`, `costs` and `gamma` are
//! optional; the initial state defaults to the first listed one. When
//! `facts` is present each label is a comma-separated list of the facts
//! true in that state.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{default_gamma, ActionInfo, ExplicitMdp, Row, StateInfo};
use crate::rational::{format_rational, parse_rational, Prob};
use crate::task::{split_fact_list, FactTable, State};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("transition references unknown state `{0}`")]
    DanglingState(String),
    #[error("transition references unknown action `{0}`")]
    UnknownAction(String),
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("duplicate transition for ({from}, {action})")]
    DuplicateRow { from: String, action: String },
    #[error("probabilities of ({from}, {action}) sum to {sum}")]
    ProbabilitySum { from: String, action: String, sum: String },
    #[error("invalid probability `{value}` in ({from}, {action})")]
    BadProbability { from: String, action: String, value: String },
    #[error("label of `{state}` names unknown fact `{fact}`")]
    UnknownFact { state: String, fact: String },
    #[error("invalid fact table: {0}")]
    Facts(#[from] crate::task::TaskError),
    #[error("invalid discount `{0}`")]
    BadDiscount(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StateEntry {
    id: String,
    #[serde(default)]
    label: String,
    #[serde(default)]
    goal: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TransitionEntry {
    from: String,
    action: String,
    to: Vec<(String, serde_json::Value)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    facts: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init: Option<String>,
    states: Vec<StateEntry>,
    actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    costs: Option<BTreeMap<String, u32>>,
    transitions: Vec<TransitionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<String>,
}

fn value_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn load_graph(text: &str) -> Result<ExplicitMdp, GraphError> {
    let file: GraphFile = serde_json::from_str(text)?;
    let mut ids: HashMap<&str, usize> = HashMap::new();
    for (i, s) in file.states.iter().enumerate() {
        if ids.insert(s.id.as_str(), i).is_some() {
            return Err(GraphError::DuplicateState(s.id.clone()));
        }
    }
    let actions: HashMap<&str, usize> = file.actions.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();

    let (facts, vectors) = match &file.facts {
        Some(names) => {
            let table = FactTable::new(names.clone())?;
            let mut vecs = Vec::with_capacity(file.states.len());
            for s in &file.states {
                let mut v = State::empty(table.len());
                for f in split_fact_list(&s.label) {
                    let i = table
                        .lookup(f)
                        .ok_or_else(|| GraphError::UnknownFact { state: s.id.clone(), fact: f.to_string() })?;
                    v.set(i, true);
                }
                vecs.push(v);
            }
            (Some(table), Some(vecs))
        }
        None => (None, None),
    };

    let mut rows: Vec<BTreeMap<usize, Row>> = vec![BTreeMap::new(); file.states.len()];
    for tr in &file.transitions {
        let from = *ids.get(tr.from.as_str()).ok_or_else(|| GraphError::DanglingState(tr.from.clone()))?;
        let action = *actions.get(tr.action.as_str()).ok_or_else(|| GraphError::UnknownAction(tr.action.clone()))?;
        let mut mass: BTreeMap<usize, Prob> = BTreeMap::new();
        for (to, p) in &tr.to {
            let t = *ids.get(to.as_str()).ok_or_else(|| GraphError::DanglingState(to.clone()))?;
            let text = value_text(p);
            let prob = parse_rational(&text).ok().filter(|p| *p > Prob::zero() && *p <= Prob::one()).ok_or_else(|| {
                GraphError::BadProbability { from: tr.from.clone(), action: tr.action.clone(), value: text.clone() }
            })?;
            *mass.entry(t).or_insert_with(Prob::zero) += prob;
        }
        let total: Prob = mass.values().sum();
        if !total.is_one() {
            return Err(GraphError::ProbabilitySum {
                from: tr.from.clone(),
                action: tr.action.clone(),
                sum: format_rational(&total),
            });
        }
        let successors: Vec<(usize, Prob)> = mass.into_iter().collect();
        let reward = successors
            .iter()
            .filter(|(t, _)| file.states[*t].goal)
            .fold(Prob::zero(), |acc, (_, p)| acc + p);
        if rows[from].insert(action, Row { action, successors, reward }).is_some() {
            return Err(GraphError::DuplicateRow { from: tr.from.clone(), action: tr.action.clone() });
        }
    }

    let init = match &file.init {
        Some(id) => *ids.get(id.as_str()).ok_or_else(|| GraphError::DanglingState(id.clone()))?,
        None => 0,
    };
    let gamma = match &file.gamma {
        Some(g) => parse_rational(g)
            .ok()
            .filter(|g| *g >= Prob::zero() && *g < Prob::one())
            .ok_or_else(|| GraphError::BadDiscount(g.clone()))?,
        None => default_gamma(),
    };
    let costs = file.costs.clone().unwrap_or_default();
    Ok(ExplicitMdp {
        states: file
            .states
            .iter()
            .map(|s| StateInfo { id: s.id.clone(), label: s.label.clone(), goal: s.goal })
            .collect(),
        facts,
        vectors,
        actions: file
            .actions
            .iter()
            .map(|a| ActionInfo { name: a.clone(), cost: costs.get(a).copied().unwrap_or(1) })
            .collect(),
        rows: rows.into_iter().map(|m| m.into_values().collect()).collect(),
        init,
        gamma,
    })
}

/// Serializes `m` in the graph format; `load_graph` reads it back unchanged.
pub fn to_graph_json(m: &ExplicitMdp) -> String {
    let costs: BTreeMap<String, u32> =
        m.actions.iter().filter(|a| a.cost != 1).map(|a| (a.name.clone(), a.cost)).collect();
    let file = GraphFile {
        facts: m.facts.as_ref().map(|f| f.names().to_vec()),
        init: m.states.get(m.init).map(|s| s.id.clone()),
        states: m
            .states
            .iter()
            .map(|s| StateEntry { id: s.id.clone(), label: s.label.clone(), goal: s.goal })
            .collect(),
        actions: m.actions.iter().map(|a| a.name.clone()).collect(),
        costs: if costs.is_empty() { None } else { Some(costs) },
        transitions: m
            .rows
            .iter()
            .enumerate()
            .flat_map(|(s, rows)| {
                rows.iter().map(move |r| TransitionEntry {
                    from: m.states[s].id.clone(),
                    action: m.actions[r.action].name.clone(),
                    to: r
                        .successors
                        .iter()
                        .map(|(t, p)| (m.states[*t].id.clone(), serde_json::Value::String(format_rational(p))))
                        .collect(),
                })
            })
            .collect(),
        gamma: Some(format_rational(&m.gamma)),
    };
    serde_json::to_string_pretty(&file).expect("graph serializes")
}
