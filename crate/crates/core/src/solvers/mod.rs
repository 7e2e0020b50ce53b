//! Shortest paths, discounted value iteration, interval value iteration,
//! proper-policy diagnostics and A* search.

mod astar;
pub mod json;
mod proper;
mod shortest;
mod vi;

pub use astar::{astar_search, SearchResult};
pub use proper::{proper_policy_exists, ProperVerdict};
pub use shortest::{goal_distances, Distance};
pub use vi::{interval_value_iteration, value_iteration, IntervalValues, Policy, ValueFunction, ViOptions};

use num_traits::Zero;
use thiserror::Error;

use crate::abstraction::{AbstractMdp, AbstractionError};
use crate::rational::{format_rational, to_f64, Prob};
use crate::statespace::ExplicitMdp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("shortest paths need a deterministic model")]
    NonDeterministic,
    #[error("search needs a classical task; `{0}` has several outcomes")]
    NotClassical(String),
    #[error("discount {0} is outside [0, 1)")]
    BadDiscount(String),
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("interval row ({state}, {action}): {reason}")]
    BadInterval { state: String, action: String, reason: String },
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatRow {
    pub action: usize,
    pub successors: Vec<(usize, f64)>,
    pub reward: f64,
}

/// Point model in floating point, as consumed by value iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatModel {
    pub ids: Vec<String>,
    pub actions: Vec<String>,
    pub goal: Vec<bool>,
    pub rows: Vec<Vec<FloatRow>>,
    pub gamma: f64,
}

fn check_gamma(g: &Prob) -> Result<(), SolveError> {
    if *g < Prob::zero() || *g >= num_traits::One::one() {
        return Err(SolveError::BadDiscount(format_rational(g)));
    }
    Ok(())
}

impl FloatModel {
    pub fn from_explicit(m: &ExplicitMdp) -> Result<Self, SolveError> {
        check_gamma(&m.gamma)?;
        Ok(FloatModel {
            ids: m.states.iter().map(|s| s.id.clone()).collect(),
            actions: m.actions.iter().map(|a| a.name.clone()).collect(),
            goal: m.states.iter().map(|s| s.goal).collect(),
            rows: m
                .rows
                .iter()
                .map(|rs| {
                    rs.iter()
                        .map(|r| FloatRow {
                            action: r.action,
                            successors: r.successors.iter().map(|(t, p)| (*t, to_f64(p))).collect(),
                            reward: to_f64(&r.reward),
                        })
                        .collect()
                })
                .collect(),
            gamma: to_f64(&m.gamma),
        })
    }

    pub fn from_abstract(am: &AbstractMdp) -> Result<Self, SolveError> {
        Self::from_explicit(&am.to_explicit()?)
    }

    pub fn num_states(&self) -> usize {
        self.ids.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFloatRow {
    pub action: usize,
    /// `(target, lower, upper)`.
    pub successors: Vec<(usize, f64, f64)>,
    pub reward: (f64, f64),
}

/// Interval model in floating point. Mass not assigned to any target goes to
/// an implicit sink of value 0, standing for representatives in which the
/// action is inapplicable.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalModel {
    pub ids: Vec<String>,
    pub actions: Vec<String>,
    pub goal: Vec<bool>,
    pub rows: Vec<Vec<IntervalFloatRow>>,
    pub gamma: f64,
}

impl IntervalModel {
    /// Rejects rows with `lower > upper` or lower bounds summing above 1.
    pub fn from_abstract(am: &AbstractMdp) -> Result<Self, SolveError> {
        check_gamma(&am.gamma)?;
        let rows = am.interval_rows().ok_or(AbstractionError::NotIntervalValued)?;
        let mut out = Vec::with_capacity(rows.len());
        for (s, rs) in rows.iter().enumerate() {
            let mut fr = Vec::with_capacity(rs.len());
            for r in rs {
                let bad = |reason: String| SolveError::BadInterval {
                    state: am.states[s].id.clone(),
                    action: am.actions[r.action].name.clone(),
                    reason,
                };
                if r.successors.iter().any(|(_, lo, hi)| lo > hi || *lo < Prob::zero()) || r.reward.0 > r.reward.1 {
                    return Err(bad("lower bound above upper bound".into()));
                }
                let lo_sum: Prob = r.successors.iter().map(|(_, lo, _)| lo).sum();
                if lo_sum > num_traits::One::one() {
                    return Err(bad(format!("lower bounds sum to {}", format_rational(&lo_sum))));
                }
                fr.push(IntervalFloatRow {
                    action: r.action,
                    successors: r.successors.iter().map(|(t, lo, hi)| (*t, to_f64(lo), to_f64(hi))).collect(),
                    reward: (to_f64(&r.reward.0), to_f64(&r.reward.1)),
                });
            }
            out.push(fr);
        }
        Ok(IntervalModel {
            ids: am.states.iter().map(|s| s.id.clone()).collect(),
            actions: am.actions.iter().map(|a| a.name.clone()).collect(),
            goal: am.states.iter().map(|s| s.goal).collect(),
            rows: out,
            gamma: to_f64(&am.gamma),
        })
    }

    pub fn num_states(&self) -> usize {
        self.ids.len()
    }
}
