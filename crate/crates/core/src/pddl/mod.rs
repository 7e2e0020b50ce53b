//! A (P)PDDL subset: typed STRIPS with positive conjunctive preconditions
//! and `probabilistic` effect lists.
//!
//! The accepted grammar:
//!
//! ```text
//! domain  ::= (define (domain NAME) (:requirements ...)? (:types ...)? (:predicates ...) action*)
//! action  ::= (:action NAME :parameters (typed-vars) :precondition (and atom*) :effect effect)
//! effect  ::= (and eff-lit*) | (probabilistic RATIONAL effect ...)
//! eff-lit ::= atom | (not atom)
//! problem ::= (define (problem NAME) (:domain NAME) (:objects typed-names) (:init atom*) (:goal (and atom*)))
//! ```
//!
//! Keywords are case-insensitive and `;` starts a comment. A bare atom is
//! also accepted where a one-element `(and ...)` is expected, and `not atom`
//! without the enclosing parentheses is accepted inside effects.

mod ground;
mod sexpr;
mod syntax;

pub use ground::{ground, ground_with_cap, parse_ground_name, Grounding, SchemaInstance, DEFAULT_FACT_CAP};
pub use sexpr::Pos;
pub use syntax::{parse_domain, parse_problem};

use thiserror::Error;

use crate::rational::Prob;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown type `{name}` at {line}:{col}")]
    UnknownType { name: String, line: usize, col: usize },
    #[error("predicate `{predicate}` expects {expected} arguments, found {found} at {line}:{col}")]
    ArityMismatch { predicate: String, expected: usize, found: usize, line: usize, col: usize },
    #[error("undeclared predicate `{name}` at {line}:{col}")]
    UndeclaredPredicate { name: String, line: usize, col: usize },
    #[error("undeclared object `{name}` at {line}:{col}")]
    UndeclaredObject { name: String, line: usize, col: usize },
    #[error("variable `{name}` is not a parameter of `{action}` ({line}:{col})")]
    UnboundVariable { name: String, action: String, line: usize, col: usize },
    #[error("object `{object}` of type `{found}` cannot fill a `{expected}` slot of `{predicate}` ({line}:{col})")]
    TypeMismatch { object: String, found: String, expected: String, predicate: String, line: usize, col: usize },
    #[error("probabilistic effect at {line}:{col}: {msg}")]
    BadProbability { msg: String, line: usize, col: usize },
    #[error("problem is for domain `{found}` but domain `{expected}` was given")]
    DomainMismatch { expected: String, found: String },
    #[error("ground action `{action}` adds and deletes `{fact}` in one outcome")]
    ConflictingEffect { action: String, fact: String },
    #[error("effect of `{action}` names `{fact}`, which is not a type-consistent fact")]
    UngroundableEffect { action: String, fact: String },
    #[error("{count} facts exceed the cap of {cap}")]
    FactOverflow { count: usize, cap: usize },
}

impl PddlError {
    pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        PddlError::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
    }
}

/// Argument of a lifted atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn fact_name(&self) -> String {
        if self.args.is_empty() {
            self.predicate.clone()
        } else {
            format!("{}({})", self.predicate, self.args.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<TypedName>,
}

/// One branch of an action's effect: taken with probability `prob`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectBranch {
    pub prob: Prob,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre: Vec<Atom>,
    pub branches: Vec<EffectBranch>,
}

impl LiftedSchema {
    pub fn is_classical(&self) -> bool {
        self.branches.len() == 1
    }
}

/// Type hierarchy rooted at `object`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeTable {
    /// (name, parent) in declaration order; `object` is implicit.
    pub types: Vec<(String, String)>,
}

impl TypeTable {
    pub fn contains(&self, ty: &str) -> bool {
        ty.eq_ignore_ascii_case("object") || self.types.iter().any(|(t, _)| t.eq_ignore_ascii_case(ty))
    }

    fn parent(&self, ty: &str) -> Option<&str> {
        self.types.iter().find(|(t, _)| t.eq_ignore_ascii_case(ty)).map(|(_, p)| p.as_str())
    }

    /// True if `sub` equals `sup` or descends from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sup.eq_ignore_ascii_case("object") {
            return true;
        }
        let mut cur = sub;
        for _ in 0..=self.types.len() {
            if cur.eq_ignore_ascii_case(sup) {
                return true;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: TypeTable,
    pub predicates: Vec<Predicate>,
    pub schemas: Vec<LiftedSchema>,
}

impl Domain {
    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name.eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectUniverse {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundAtom>,
    pub goal: Vec<GroundAtom>,
}

impl ObjectUniverse {
    pub fn object(&self, name: &str) -> Option<&TypedName> {
        self.objects.iter().find(|o| o.name.eq_ignore_ascii_case(name))
    }
}
