//! Grounding lifted schemas over an object universe.
//!
//! Fact order: zero-arity predicates first, then facts grouped by their
//! first argument in object declaration order, predicates in declaration
//! order within a group, remaining arguments in object declaration order.
//! For the bundled Logistics instance this yields the state layout
//! `at(P,L) at(P,R) in(P,A) in(P,B) at(A,L) at(A,R) at(B,L) at(B,R)`.

use std::collections::HashMap;

use super::*;
use crate::task::{EffectOutcome, FactTable, GroundAction, PlanningTask, State};

pub const DEFAULT_FACT_CAP: usize = 64;

/// A schema together with the object binding it was instantiated with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaInstance {
    pub schema: String,
    pub args: Vec<String>,
}

impl SchemaInstance {
    pub fn name(&self) -> String {
        if self.args.is_empty() {
            self.schema.clone()
        } else {
            format!("{}({})", self.schema, self.args.join(","))
        }
    }
}

/// Recovers schema and binding from a ground action name like `Load(L,P,A)`.
pub fn parse_ground_name(name: &str) -> SchemaInstance {
    match name.split_once('(') {
        Some((schema, rest)) => SchemaInstance {
            schema: schema.to_string(),
            args: rest.trim_end_matches(')').split(',').map(str::to_string).collect(),
        },
        None => SchemaInstance { schema: name.to_string(), args: Vec::new() },
    }
}

#[derive(Debug, Clone)]
pub struct Grounding {
    pub task: PlanningTask,
    /// Binding behind each ground action, parallel to `task.actions`.
    pub instances: Vec<SchemaInstance>,
    /// Bindings dropped because every branch has a zero net effect.
    pub pruned: Vec<SchemaInstance>,
}

pub fn ground(domain: &Domain, universe: &ObjectUniverse) -> Result<Grounding, PddlError> {
    ground_with_cap(domain, universe, DEFAULT_FACT_CAP)
}

/// Objects that can fill a slot of type `ty`, in declaration order.
fn candidates<'a>(domain: &Domain, universe: &'a ObjectUniverse, ty: &str) -> Vec<&'a TypedName> {
    universe.objects.iter().filter(|o| domain.types.is_subtype(&o.ty, ty)).collect()
}

/// Every combination of one object per slot, leftmost slot varying slowest.
fn bindings<'a>(slots: &[Vec<&'a TypedName>]) -> Vec<Vec<&'a TypedName>> {
    let mut out: Vec<Vec<&TypedName>> = vec![Vec::new()];
    for slot in slots {
        let mut next = Vec::with_capacity(out.len() * slot.len());
        for prefix in &out {
            for o in slot {
                let mut b = prefix.clone();
                b.push(*o);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn fact_table(domain: &Domain, universe: &ObjectUniverse, cap: usize) -> Result<Vec<GroundAtom>, PddlError> {
    let mut facts = Vec::new();
    let push = |facts: &mut Vec<GroundAtom>, atom: GroundAtom| -> Result<(), PddlError> {
        facts.push(atom);
        if facts.len() > cap {
            return Err(PddlError::FactOverflow { count: facts.len(), cap });
        }
        Ok(())
    };
    for p in domain.predicates.iter().filter(|p| p.params.is_empty()) {
        push(&mut facts, GroundAtom { predicate: p.name.clone(), args: Vec::new() })?;
    }
    for first in &universe.objects {
        for p in domain.predicates.iter().filter(|p| !p.params.is_empty()) {
            if !domain.types.is_subtype(&first.ty, &p.params[0].ty) {
                continue;
            }
            let rest: Vec<_> = p.params[1..].iter().map(|t| candidates(domain, universe, &t.ty)).collect();
            for tail in bindings(&rest) {
                let mut args = vec![first.name.clone()];
                args.extend(tail.iter().map(|o| o.name.clone()));
                push(&mut facts, GroundAtom { predicate: p.name.clone(), args })?;
            }
        }
    }
    Ok(facts)
}

pub fn ground_with_cap(domain: &Domain, universe: &ObjectUniverse, cap: usize) -> Result<Grounding, PddlError> {
    let atoms = fact_table(domain, universe, cap)?;
    let names: Vec<String> = atoms.iter().map(GroundAtom::fact_name).collect();
    let index: HashMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.to_ascii_lowercase(), i)).collect();
    let lookup = |a: &GroundAtom| index.get(&a.fact_name().to_ascii_lowercase()).copied();
    let facts = FactTable::new(names.clone()).expect("ground atoms are unique");
    let width = facts.len();

    let mut init = State::empty(width);
    for a in &universe.init {
        let i = lookup(a).expect("init atoms are type-checked at parse time");
        init.set(i, true);
    }
    let goal = universe
        .goal
        .iter()
        .map(|a| lookup(a).expect("goal atoms are type-checked at parse time"))
        .collect::<Vec<_>>();

    let mut actions = Vec::new();
    let mut instances = Vec::new();
    let mut pruned = Vec::new();
    for schema in &domain.schemas {
        let slots: Vec<_> = schema.params.iter().map(|p| candidates(domain, universe, &p.ty)).collect();
        'binding: for binding in bindings(&slots) {
            let env: HashMap<&str, &str> =
                schema.params.iter().zip(&binding).map(|(p, o)| (p.name.as_str(), o.name.as_str())).collect();
            let instance = SchemaInstance {
                schema: schema.name.clone(),
                args: binding.iter().map(|o| o.name.clone()).collect(),
            };
            let resolve = |atom: &Atom| -> Result<GroundAtom, PddlError> {
                let mut args = Vec::with_capacity(atom.args.len());
                for t in &atom.args {
                    match t {
                        Term::Var(v) => args.push(env[v.as_str()].to_string()),
                        Term::Const(c) => match universe.object(c) {
                            Some(o) => args.push(o.name.clone()),
                            None => {
                                return Err(PddlError::UndeclaredObject { name: c.clone(), line: 0, col: 0 });
                            }
                        },
                    }
                }
                Ok(GroundAtom { predicate: atom.predicate.clone(), args })
            };

            let mut pre = Vec::with_capacity(schema.pre.len());
            for atom in &schema.pre {
                match lookup(&resolve(atom)?) {
                    Some(i) => pre.push(i),
                    // a type-inconsistent precondition can never hold
                    None => continue 'binding,
                }
            }
            pre.sort_unstable();
            pre.dedup();

            let mut outcomes = Vec::with_capacity(schema.branches.len());
            for branch in &schema.branches {
                let ids = |atoms: &[Atom]| -> Result<Vec<usize>, PddlError> {
                    atoms
                        .iter()
                        .map(|a| {
                            let g = resolve(a)?;
                            lookup(&g).ok_or_else(|| PddlError::UngroundableEffect {
                                action: instance.name(),
                                fact: g.fact_name(),
                            })
                        })
                        .collect()
                };
                let add = ids(&branch.add)?;
                let del = ids(&branch.del)?;
                outcomes.push(EffectOutcome::new(add, del, branch.prob.clone()));
            }

            let zero_delta = outcomes
                .iter()
                .all(|o| crate::task::effect_delta(o, width).iter().all(|&d| d == 0));
            if zero_delta {
                pruned.push(instance);
                continue;
            }
            for o in &outcomes {
                if let Some(f) = o.add.iter().find(|f| o.del.contains(f)) {
                    return Err(PddlError::ConflictingEffect { action: instance.name(), fact: names[*f].clone() });
                }
            }
            actions.push(GroundAction { name: instance.name(), pre, outcomes, cost: 1 });
            instances.push(instance);
        }
    }

    Ok(Grounding { task: PlanningTask::new(facts, actions, init, goal), instances, pruned })
}
