//! Backward uniform-cost search from the goal states.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::SolveError;
use crate::statespace::ExplicitMdp;

/// Cost to the nearest goal; `None` when no goal is reachable.
pub type Distance = Option<u64>;

/// Dijkstra over reversed edges, weighted by action cost. Self-loops are
/// ignored.
pub fn goal_distances(m: &ExplicitMdp) -> Result<Vec<Distance>, SolveError> {
    if !m.is_deterministic() {
        return Err(SolveError::NonDeterministic);
    }
    let n = m.num_states();
    let mut preds: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for (s, rows) in m.rows.iter().enumerate() {
        for r in rows {
            let t = r.successors[0].0;
            if t != s {
                preds[t].push((s, u64::from(m.actions[r.action].cost)));
            }
        }
    }
    let mut dist: Vec<Distance> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for g in m.goal_states() {
        dist[g] = Some(0);
        heap.push(Reverse((0u64, g)));
    }
    while let Some(Reverse((d, s))) = heap.pop() {
        if dist[s].is_some_and(|x| x < d) {
            continue;
        }
        for &(p, c) in &preds[s] {
            let nd = d + c;
            if dist[p].is_none_or(|x| nd < x) {
                dist[p] = Some(nd);
                heap.push(Reverse((nd, p)));
            }
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{self, PACKAGE_PATTERN};
    use crate::projection::{abstract_graph, project_task, Pattern};
    use crate::statespace::{default_gamma, expand};

    /// Length of the cheapest path found by breadth-first enumeration.
    fn bfs_oracle(m: &ExplicitMdp, s: usize) -> Distance {
        let mut frontier = vec![s];
        let mut seen = vec![false; m.num_states()];
        seen[s] = true;
        for depth in 0.. {
            if frontier.iter().any(|&x| m.is_goal(x)) {
                return Some(depth);
            }
            let mut next = Vec::new();
            for &x in &frontier {
                for r in &m.rows[x] {
                    let t = r.successors[0].0;
                    if !seen[t] {
                        seen[t] = true;
                        next.push(t);
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
            frontier = next;
        }
        unreachable!()
    }

    #[test]
    fn logistics_distances() {
        let t = instances::logistics().unwrap();
        let p = Pattern::from_names(&PACKAGE_PATTERN, &t.facts).unwrap();
        let g = abstract_graph(&project_task(&t, &p), &default_gamma()).unwrap();
        assert_eq!(goal_distances(&g).unwrap(), [Some(2), Some(1), Some(1), Some(0)]);
        let m = expand(&t, &default_gamma()).unwrap();
        let d = goal_distances(&m).unwrap();
        assert_eq!(d[m.init], Some(4));
        for s in 0..m.num_states() {
            assert_eq!(d[s], bfs_oracle(&m, s));
            // Bellman optimality
            if !m.is_goal(s) {
                let best = m.rows[s].iter().filter_map(|r| d[r.successors[0].0].map(|x| x + 1)).min();
                assert_eq!(d[s], best);
            }
        }
    }

    #[test]
    fn probabilistic_models_are_rejected() {
        let m = expand(&instances::probabilistic_logistics().unwrap(), &default_gamma()).unwrap();
        assert_eq!(goal_distances(&m), Err(SolveError::NonDeterministic));
    }
}
