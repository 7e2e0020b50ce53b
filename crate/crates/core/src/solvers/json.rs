//! JSON output of solver results. Values are written as decimal strings with
//! 17 significant digits, which round-trip every `f64`.

use serde_json::{json, Value};

use super::{Distance, IntervalValues, Policy, SearchResult, ValueFunction};

pub fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

fn sweeps(vf: &ValueFunction) -> Value {
    json!({
        "iterations": vf.iterations,
        "residual": decimal(vf.residual),
        "converged": vf.converged,
    })
}

pub fn values_json(ids: &[String], actions: &[String], vf: &ValueFunction, pi: &Policy) -> Value {
    let states: Vec<Value> = ids
        .iter()
        .zip(&vf.values)
        .zip(&pi.actions)
        .map(|((id, v), a)| json!({"state": id, "value": decimal(*v), "action": a.map(|a| actions[a].clone())}))
        .collect();
    json!({"solver": "value_iteration", "states": states, "convergence": sweeps(vf)})
}

pub fn interval_json(ids: &[String], iv: &IntervalValues) -> Value {
    let states: Vec<Value> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| json!({"state": id, "lower": decimal(iv.lower.values[i]), "upper": decimal(iv.upper.values[i])}))
        .collect();
    json!({
        "solver": "interval_value_iteration",
        "states": states,
        "convergence": {"lower": sweeps(&iv.lower), "upper": sweeps(&iv.upper)},
    })
}

pub fn search_json(r: &SearchResult, heuristic: &str) -> Value {
    json!({
        "solver": "astar",
        "heuristic": heuristic,
        "cost": r.cost,
        "plan": r.plan.as_ref().map(|p| p.steps.clone()),
        "expansions": r.expansions,
        "generated": r.generated,
    })
}

/// `null` marks an unreachable goal.
pub fn distances_json(ids: &[String], d: &[Distance]) -> Value {
    let states: Vec<Value> = ids.iter().zip(d).map(|(id, d)| json!({"state": id, "distance": d})).collect();
    json!({"solver": "goal_distances", "states": states})
}
