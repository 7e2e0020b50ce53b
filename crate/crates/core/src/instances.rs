//! Bundled worked instances.

pub const LOGISTICS_DOMAIN: &str = include_str!("../data/logistics-domain.pddl");
pub const LOGISTICS_PROBLEM: &str = include_str!("../data/logistics-problem.pddl");
/// Logistics with `Load` succeeding with probability 4/5.
pub const LOGISTICS_PROB_DOMAIN: &str = include_str!("../data/logistics-prob-domain.pddl");
/// Explicit 16-state graph whose {p1, p2} projection admits no WFA.
pub const COUNTEREXAMPLE_GRAPH: &str = include_str!("../data/counterexample.json");

/// Fact names of the package pattern, in state-vector order.
pub const PACKAGE_PATTERN: [&str; 4] = ["at(P,L)", "at(P,R)", "in(P,A)", "in(P,B)"];

use crate::pddl::{self, PddlError};
use crate::task::PlanningTask;

pub fn logistics() -> Result<PlanningTask, PddlError> {
    load(LOGISTICS_DOMAIN, LOGISTICS_PROBLEM)
}

pub fn probabilistic_logistics() -> Result<PlanningTask, PddlError> {
    load(LOGISTICS_PROB_DOMAIN, LOGISTICS_PROBLEM)
}

/// Parses and grounds a domain/problem pair with default limits.
pub fn load(domain: &str, problem: &str) -> Result<PlanningTask, PddlError> {
    let d = pddl::parse_domain(domain)?;
    let u = pddl::parse_problem(problem, &d)?;
    Ok(pddl::ground(&d, &u)?.task)
}
