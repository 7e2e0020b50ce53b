//! Existence of a policy reaching the goal with probability 1.

use crate::statespace::ExplicitMdp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperVerdict {
    pub exists: bool,
    /// States from which no policy reaches the goal almost surely.
    pub dead: Vec<usize>,
}

/// Greatest fixed point of "some action keeps all mass inside the set and
/// can reach the goal through it". For deterministic models this is plain
/// backward reachability.
pub fn proper_policy_exists(m: &ExplicitMdp, goal: &[bool]) -> ProperVerdict {
    let n = m.num_states();
    let mut alive = vec![true; n];
    loop {
        // least fixed point: states that reach the goal while staying in `alive`
        let mut reach: Vec<bool> = (0..n).map(|s| goal[s]).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..n {
                if reach[s] || !alive[s] {
                    continue;
                }
                let ok = m.rows[s].iter().any(|r| {
                    r.successors.iter().all(|(t, _)| alive[*t]) && r.successors.iter().any(|(t, _)| reach[*t])
                });
                if ok {
                    reach[s] = true;
                    changed = true;
                }
            }
        }
        if reach == alive {
            break;
        }
        alive = reach;
    }
    let dead: Vec<usize> = (0..n).filter(|&s| !alive[s]).collect();
    ProperVerdict { exists: dead.is_empty() && (n == 0 || goal.iter().any(|&g| g)), dead }
}
