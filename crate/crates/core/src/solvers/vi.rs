//! Discounted value iteration over point and interval models.

use super::{FloatModel, IntervalModel, SolveError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViOptions {
    pub epsilon: f64,
    /// Goal states keep value 0 and are not backed up.
    pub absorb_goals: bool,
    pub max_iterations: usize,
}

impl Default for ViOptions {
    fn default() -> Self {
        ViOptions { epsilon: 1e-10, absorb_goals: true, max_iterations: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub values: Vec<f64>,
    /// Sup-norm change of the last sweep.
    pub residual: f64,
    pub iterations: usize,
    /// Residual of every sweep, in order.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Greedy action per state; `None` where no action is applicable or the
/// state is an absorbed goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub actions: Vec<Option<usize>>,
}

/// Sweeps stop once the residual is at most `ε(1-γ)/(2γ)`, which makes the
/// greedy policy ε-optimal.
fn threshold(gamma: f64, epsilon: f64) -> f64 {
    if gamma == 0.0 {
        f64::INFINITY
    } else {
        epsilon * (1.0 - gamma) / (2.0 * gamma)
    }
}

fn check(opts: &ViOptions) -> Result<(), SolveError> {
    if opts.epsilon.is_nan() || opts.epsilon <= 0.0 {
        return Err(SolveError::BadTolerance);
    }
    Ok(())
}

/// Synchronous sweeps of `backup` until the stopping rule holds.
fn iterate(
    n: usize,
    gamma: f64,
    opts: &ViOptions,
    frozen: &[bool],
    mut backup: impl FnMut(usize, &[f64]) -> Option<f64>,
) -> ValueFunction {
    let thr = threshold(gamma, opts.epsilon);
    let mut v = vec![0.0; n];
    let mut residuals = Vec::new();
    let mut converged = false;
    while residuals.len() < opts.max_iterations {
        let next: Vec<f64> = (0..n).map(|s| if frozen[s] { 0.0 } else { backup(s, &v).unwrap_or(0.0) }).collect();
        let r = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        residuals.push(r);
        if r <= thr {
            converged = true;
            break;
        }
    }
    ValueFunction { residual: residuals.last().copied().unwrap_or(0.0), iterations: residuals.len(), values: v, residuals, converged }
}

fn frozen(goal: &[bool], opts: &ViOptions) -> Vec<bool> {
    goal.iter().map(|&g| g && opts.absorb_goals).collect()
}

pub fn value_iteration(m: &FloatModel, opts: &ViOptions) -> Result<(ValueFunction, Policy), SolveError> {
    check(opts)?;
    let fz = frozen(&m.goal, opts);
    let q = |v: &[f64], r: &super::FloatRow| r.reward + m.gamma * r.successors.iter().map(|(t, p)| p * v[*t]).sum::<f64>();
    let vf = iterate(m.num_states(), m.gamma, opts, &fz, |s, v| m.rows[s].iter().map(|r| q(v, r)).reduce(f64::max));
    let actions = (0..m.num_states())
        .map(|s| {
            if fz[s] {
                return None;
            }
            let mut best: Option<(usize, f64)> = None;
            for r in &m.rows[s] {
                let val = q(&vf.values, r);
                if best.is_none_or(|(_, b)| val > b) {
                    best = Some((r.action, val));
                }
            }
            best.map(|(a, _)| a)
        })
        .collect();
    Ok((vf, Policy { actions }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalValues {
    pub lower: ValueFunction,
    pub upper: ValueFunction,
}

/// Expected successor value under the ordered mass assignment: every entry
/// gets its lower bound, the remaining mass fills the best entries first
/// (`optimistic`) or the worst first. The sink has value 0 and absorbs
/// whatever the listed upper bounds leave over.
pub fn ordered_expectation(entries: &[(f64, f64, f64)], optimistic: bool) -> f64 {
    let lo_sum: f64 = entries.iter().map(|e| e.1).sum();
    let hi_sum: f64 = entries.iter().map(|e| e.2).sum();
    let mut all: Vec<(f64, f64, f64)> = entries.to_vec();
    all.push((0.0, (1.0 - hi_sum).max(0.0), (1.0 - lo_sum).max(0.0)));
    if optimistic {
        all.sort_by(|a, b| b.0.total_cmp(&a.0));
    } else {
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let mut remaining = 1.0 - all.iter().map(|e| e.1).sum::<f64>();
    let mut total = 0.0;
    for (v, lo, hi) in all {
        let extra = (hi - lo).min(remaining).max(0.0);
        remaining -= extra;
        total += (lo + extra) * v;
    }
    total
}

/// Values of the least and most favourable members of the family: each
/// backup picks the transition inside the intervals (and the reward bound)
/// that minimises or maximises the successor value, then the agent maximises
/// over actions.
pub fn interval_value_iteration(m: &IntervalModel, opts: &ViOptions) -> Result<IntervalValues, SolveError> {
    check(opts)?;
    let fz = frozen(&m.goal, opts);
    let run = |optimistic: bool| {
        iterate(m.num_states(), m.gamma, opts, &fz, |s, v| {
            m.rows[s]
                .iter()
                .map(|r| {
                    let entries: Vec<(f64, f64, f64)> = r.successors.iter().map(|(t, lo, hi)| (v[*t], *lo, *hi)).collect();
                    let reward = if optimistic { r.reward.1 } else { r.reward.0 };
                    reward + m.gamma * ordered_expectation(&entries, optimistic)
                })
                .reduce(f64::max)
        })
    };
    Ok(IntervalValues { lower: run(false), upper: run(true) })
}
