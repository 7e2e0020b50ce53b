//! Projection abstractions of planning tasks and MDPs.
//!
//! The pipeline is: parse and ground a PDDL domain ([`pddl`]), expand the
//! reachable state space ([`statespace`]), project it onto a pattern
//! ([`projection`]), build weighted or interval abstractions of the explicit
//! MDP ([`abstraction`]), and solve or search ([`solvers`], [`pdb`]).

pub mod abstraction;
pub mod corpus;
pub mod dot;
pub mod instances;
pub mod par;
pub mod pdb;
pub mod pddl;
pub mod projection;
pub mod rational;
pub mod report;
pub mod solvers;
pub mod statespace;
pub mod task;
