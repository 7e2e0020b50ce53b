//! A* over the implicit state space of a classical task.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::SolveError;
use crate::task::{self, ActionSequence, PlanningTask, State};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    /// `None` when the goal is unreachable.
    pub plan: Option<ActionSequence>,
    pub cost: Option<u64>,
    /// States taken from the open list and expanded.
    pub expansions: usize,
    /// Distinct states discovered.
    pub generated: usize,
}

/// A* with heuristic `h` (`None` marks a dead end and prunes the state).
/// The open list is ordered by f, then smaller h, then earlier discovery;
/// successors are generated in action declaration order. Optimal whenever
/// `h` is admissible.
pub fn astar_search<H>(t: &PlanningTask, mut h: H) -> Result<SearchResult, SolveError>
where
    H: FnMut(&State) -> Option<u64>,
{
    if let Some(a) = t.actions.iter().find(|a| !a.is_classical()) {
        return Err(SolveError::NotClassical(a.name.clone()));
    }
    let mut index: HashMap<State, usize> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut g: Vec<u64> = Vec::new();
    let mut hv: Vec<Option<u64>> = Vec::new();
    let mut parent: Vec<Option<(usize, usize)>> = Vec::new();
    let mut closed: Vec<bool> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut expansions = 0;

    let h0 = h(&t.init);
    index.insert(t.init.clone(), 0);
    states.push(t.init.clone());
    g.push(0);
    hv.push(h0);
    parent.push(None);
    closed.push(false);
    if let Some(h0) = h0 {
        heap.push(Reverse((h0, h0, 0usize)));
    }

    while let Some(Reverse((f, _, s))) = heap.pop() {
        if closed[s] || f != g[s] + hv[s].expect("queued states have finite h") {
            continue;
        }
        if task::is_goal(&states[s], t) {
            let mut steps = Vec::new();
            let mut cur = s;
            while let Some((p, a)) = parent[cur] {
                steps.push(t.actions[a].name.clone());
                cur = p;
            }
            steps.reverse();
            return Ok(SearchResult {
                plan: Some(ActionSequence { steps }),
                cost: Some(g[s]),
                expansions,
                generated: states.len(),
            });
        }
        closed[s] = true;
        expansions += 1;
        let cur = states[s].clone();
        for (ai, a) in t.actions.iter().enumerate() {
            if !task::applicable(&cur, a).expect("task validated") {
                continue;
            }
            let next = task::apply(&cur, a, &a.outcomes[0]).expect("applicable");
            let ng = g[s] + u64::from(a.cost);
            let id = match index.get(&next) {
                Some(&i) => {
                    if ng >= g[i] {
                        continue;
                    }
                    g[i] = ng;
                    parent[i] = Some((s, ai));
                    closed[i] = false;
                    i
                }
                None => {
                    let i = states.len();
                    let hn = h(&next);
                    index.insert(next.clone(), i);
                    states.push(next);
                    g.push(ng);
                    hv.push(hn);
                    parent.push(Some((s, ai)));
                    closed.push(false);
                    i
                }
            };
            if let Some(hn) = hv[id] {
                heap.push(Reverse((ng + hn, hn, id)));
            }
        }
    }
    Ok(SearchResult { plan: None, cost: None, expansions, generated: states.len() })
}
