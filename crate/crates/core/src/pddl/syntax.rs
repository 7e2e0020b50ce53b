use num_traits::{One, Zero};

use super::sexpr::{parse_all, Pos, Sexpr};
use super::*;
use crate::rational::{format_rational, parse_rational};

fn expect_list<'a>(e: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], PddlError> {
    e.as_list().ok_or_else(|| PddlError::syntax(e.pos(), format!("expected {what}")))
}

fn expect_atom<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom().ok_or_else(|| PddlError::syntax(e.pos(), format!("expected {what}")))
}

/// `(define (KIND NAME) sections...)` → (name, sections).
fn define_block<'a>(text: &str, kind: &str, storage: &'a mut Vec<Sexpr>) -> Result<(String, &'a [Sexpr]), PddlError> {
    *storage = parse_all(text)?;
    let top = match storage.as_slice() {
        [one] => one,
        [] => return Err(PddlError::syntax(Pos { line: 1, col: 1 }, "empty input")),
        [_, extra, ..] => return Err(PddlError::syntax(extra.pos(), "trailing input after `define`")),
    };
    let items = expect_list(top, "`(define ...)`")?;
    if !items.first().is_some_and(|h| h.is_keyword("define")) {
        return Err(PddlError::syntax(top.pos(), "expected `define`"));
    }
    let header = items.get(1).ok_or_else(|| PddlError::syntax(top.pos(), format!("missing `({kind} NAME)`")))?;
    let h = expect_list(header, &format!("`({kind} NAME)`"))?;
    match h {
        [k, name] if k.is_keyword(kind) => Ok((expect_atom(name, "name")?.to_string(), &items[2..])),
        _ => Err(PddlError::syntax(header.pos(), format!("expected `({kind} NAME)`"))),
    }
}

/// Parses `a b - t c d - u e`; untyped names default to `object`.
fn typed_list(items: &[Sexpr]) -> Result<Vec<(TypedName, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        let tok = expect_atom(item, "a name")?;
        if tok == "-" {
            let ty_expr = items.get(i + 1).ok_or_else(|| PddlError::syntax(item.pos(), "missing type after `-`"))?;
            let ty = expect_atom(ty_expr, "a type name (`either` is not supported)")?;
            if pending.is_empty() {
                return Err(PddlError::syntax(item.pos(), "type annotation without names"));
            }
            for (name, pos) in pending.drain(..) {
                out.push((TypedName { name, ty: ty.to_string() }, pos));
            }
            i += 2;
        } else {
            pending.push((tok.to_string(), item.pos()));
            i += 1;
        }
    }
    for (name, pos) in pending {
        out.push((TypedName { name, ty: "object".to_string() }, pos));
    }
    Ok(out)
}

fn check_type(types: &TypeTable, ty: &str, pos: Pos) -> Result<(), PddlError> {
    if types.contains(ty) {
        Ok(())
    } else {
        Err(PddlError::UnknownType { name: ty.to_string(), line: pos.line, col: pos.col })
    }
}

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let mut storage = Vec::new();
    let (name, sections) = define_block(text, "domain", &mut storage)?;
    let mut domain = Domain {
        name,
        requirements: Vec::new(),
        types: TypeTable::default(),
        predicates: Vec::new(),
        schemas: Vec::new(),
    };
    let mut actions = Vec::new();
    let mut type_positions = Vec::new();
    for section in sections {
        let items = expect_list(section, "a domain section")?;
        let head = items.first().and_then(Sexpr::as_atom).unwrap_or("");
        match head.to_ascii_lowercase().as_str() {
            ":requirements" => {
                for r in &items[1..] {
                    domain.requirements.push(expect_atom(r, "a requirement flag")?.to_ascii_lowercase());
                }
            }
            ":types" => {
                for (t, pos) in typed_list(&items[1..])? {
                    type_positions.push((t.ty.clone(), pos));
                    domain.types.types.push((t.name, t.ty));
                }
            }
            ":predicates" => {
                for p in &items[1..] {
                    let parts = expect_list(p, "a predicate declaration")?;
                    let pname = parts.first().ok_or_else(|| PddlError::syntax(p.pos(), "empty predicate"))?;
                    let pname = expect_atom(pname, "a predicate name")?;
                    let params = typed_list(&parts[1..])?;
                    domain.predicates.push(Predicate {
                        name: pname.to_string(),
                        params: params.into_iter().map(|(t, _)| t).collect(),
                    });
                }
            }
            ":action" => actions.push(section),
            _ => return Err(PddlError::syntax(section.pos(), format!("unsupported domain section `{head}`"))),
        }
    }
    for (ty, pos) in type_positions {
        check_type(&domain.types, &ty, pos)?;
    }
    for s in sections {
        if s.head().is_some_and(|h| h.eq_ignore_ascii_case(":predicates")) {
            for p in &s.as_list().unwrap()[1..] {
                for (t, pos) in typed_list(&p.as_list().unwrap()[1..])? {
                    check_type(&domain.types, &t.ty, pos)?;
                }
            }
        }
    }
    for a in actions {
        let schema = parse_action(&domain, a)?;
        domain.schemas.push(schema);
    }
    Ok(domain)
}

struct ActionCtx<'a> {
    domain: &'a Domain,
    action: &'a str,
    params: &'a [TypedName],
}

impl ActionCtx<'_> {
    fn atom(&self, e: &Sexpr) -> Result<Atom, PddlError> {
        let items = expect_list(e, "an atom")?;
        let head = items.first().ok_or_else(|| PddlError::syntax(e.pos(), "empty atom"))?;
        let name = expect_atom(head, "a predicate name")?;
        let pos = e.pos();
        let pred = self.domain.predicate(name).ok_or_else(|| PddlError::UndeclaredPredicate {
            name: name.to_string(),
            line: pos.line,
            col: pos.col,
        })?;
        let args = &items[1..];
        if args.len() != pred.params.len() {
            return Err(PddlError::ArityMismatch {
                predicate: pred.name.clone(),
                expected: pred.params.len(),
                found: args.len(),
                line: pos.line,
                col: pos.col,
            });
        }
        let mut terms = Vec::with_capacity(args.len());
        for a in args {
            let tok = expect_atom(a, "a term")?;
            if tok.starts_with('?') {
                if !self.params.iter().any(|p| p.name.eq_ignore_ascii_case(tok)) {
                    let p = a.pos();
                    return Err(PddlError::UnboundVariable {
                        name: tok.to_string(),
                        action: self.action.to_string(),
                        line: p.line,
                        col: p.col,
                    });
                }
                terms.push(Term::Var(tok.to_ascii_lowercase()));
            } else {
                terms.push(Term::Const(tok.to_string()));
            }
        }
        Ok(Atom { predicate: pred.name.clone(), args: terms })
    }

    fn precondition(&self, e: &Sexpr) -> Result<Vec<Atom>, PddlError> {
        match e.as_list() {
            Some([]) => Ok(Vec::new()),
            Some(items) if items[0].is_keyword("and") => items[1..].iter().map(|x| self.atom(x)).collect(),
            Some(items) if items[0].is_keyword("not") => {
                Err(PddlError::syntax(e.pos(), "negative preconditions are not supported"))
            }
            Some(_) => Ok(vec![self.atom(e)?]),
            None => Err(PddlError::syntax(e.pos(), "expected a precondition")),
        }
    }

    /// Flattened distribution over (add, del) branches.
    fn effect(&self, e: &Sexpr) -> Result<Vec<EffectBranch>, PddlError> {
        let items = expect_list(e, "an effect")?;
        let empty = || EffectBranch { prob: Prob::one(), add: Vec::new(), del: Vec::new() };
        if items.is_empty() {
            return Ok(vec![empty()]);
        }
        if items[0].is_keyword("probabilistic") {
            return self.probabilistic(e, &items[1..]);
        }
        if items[0].is_keyword("not") {
            let mut b = empty();
            b.del.push(self.negated(e, items)?);
            return Ok(vec![b]);
        }
        if !items[0].is_keyword("and") {
            let mut b = empty();
            b.add.push(self.atom(e)?);
            return Ok(vec![b]);
        }
        let mut branches = vec![empty()];
        let mut i = 1;
        while i < items.len() {
            let item = &items[i];
            if item.is_keyword("not") {
                let target = items.get(i + 1).ok_or_else(|| PddlError::syntax(item.pos(), "`not` without an atom"))?;
                let atom = self.atom(target)?;
                for b in &mut branches {
                    b.del.push(atom.clone());
                }
                i += 2;
                continue;
            }
            let sub = expect_list(item, "an effect literal")?;
            if sub.first().is_some_and(|h| h.is_keyword("when") || h.is_keyword("forall")) {
                return Err(PddlError::syntax(item.pos(), "conditional and quantified effects are not supported"));
            }
            let parts = self.effect(item)?;
            let mut next = Vec::with_capacity(branches.len() * parts.len());
            for b in &branches {
                for p in &parts {
                    let mut add = b.add.clone();
                    add.extend(p.add.iter().cloned());
                    let mut del = b.del.clone();
                    del.extend(p.del.iter().cloned());
                    next.push(EffectBranch { prob: &b.prob * &p.prob, add, del });
                }
            }
            branches = next;
            i += 1;
        }
        Ok(branches)
    }

    fn negated(&self, e: &Sexpr, items: &[Sexpr]) -> Result<Atom, PddlError> {
        match items {
            [_, inner] => self.atom(inner),
            _ => Err(PddlError::syntax(e.pos(), "`(not ...)` takes exactly one atom")),
        }
    }

    fn probabilistic(&self, e: &Sexpr, items: &[Sexpr]) -> Result<Vec<EffectBranch>, PddlError> {
        let pos = e.pos();
        let bad = |msg: String| PddlError::BadProbability { msg, line: pos.line, col: pos.col };
        let mut pairs: Vec<(&Sexpr, &Sexpr)> = Vec::new();
        let mut i = 0;
        while i < items.len() {
            let item = &items[i];
            match item {
                Sexpr::Atom(..) => {
                    let eff = items.get(i + 1).ok_or_else(|| bad("probability without an effect".into()))?;
                    pairs.push((item, eff));
                    i += 2;
                }
                Sexpr::List(inner, _) => match inner.as_slice() {
                    [p @ Sexpr::Atom(..), eff] if parse_rational(p.as_atom().unwrap()).is_ok() => {
                        pairs.push((p, eff));
                        i += 1;
                    }
                    _ => return Err(bad("expected `PROB EFFECT` pairs".into())),
                },
            }
        }
        if pairs.is_empty() {
            return Err(bad("no branches".into()));
        }
        let mut total = Prob::zero();
        let mut out = Vec::new();
        for (p, eff) in pairs {
            let text = p.as_atom().unwrap();
            let prob = parse_rational(text).map_err(|e| bad(e.to_string()))?;
            if prob <= Prob::zero() || prob > Prob::one() {
                return Err(bad(format!("branch probability {text} outside (0,1]")));
            }
            total += &prob;
            for mut b in self.effect(eff)? {
                b.prob *= &prob;
                out.push(b);
            }
        }
        if !total.is_one() {
            return Err(bad(format!("branch probabilities sum to {}", format_rational(&total))));
        }
        Ok(out)
    }
}

fn parse_action(domain: &Domain, section: &Sexpr) -> Result<LiftedSchema, PddlError> {
    let items = section.as_list().unwrap();
    let name_expr = items.get(1).ok_or_else(|| PddlError::syntax(section.pos(), "missing action name"))?;
    let name = expect_atom(name_expr, "an action name")?.to_string();
    let mut params = Vec::new();
    let mut pre_expr = None;
    let mut eff_expr = None;
    let mut i = 2;
    while i < items.len() {
        let key = &items[i];
        let value = items.get(i + 1).ok_or_else(|| PddlError::syntax(key.pos(), "missing value after keyword"))?;
        match expect_atom(key, "an action keyword")?.to_ascii_lowercase().as_str() {
            ":parameters" => {
                for (t, pos) in typed_list(expect_list(value, "a parameter list")?)? {
                    if !t.name.starts_with('?') {
                        return Err(PddlError::syntax(pos, format!("parameter `{}` must start with `?`", t.name)));
                    }
                    check_type(&domain.types, &t.ty, pos)?;
                    params.push(TypedName { name: t.name.to_ascii_lowercase(), ty: t.ty });
                }
            }
            ":precondition" => pre_expr = Some(value),
            ":effect" => eff_expr = Some(value),
            other => return Err(PddlError::syntax(key.pos(), format!("unsupported action keyword `{other}`"))),
        }
        i += 2;
    }
    let ctx = ActionCtx { domain, action: &name, params: &params };
    let pre = match pre_expr {
        Some(e) => ctx.precondition(e)?,
        None => Vec::new(),
    };
    let branches = match eff_expr {
        Some(e) => ctx.effect(e)?,
        None => vec![EffectBranch { prob: Prob::one(), add: Vec::new(), del: Vec::new() }],
    };
    Ok(LiftedSchema { name, params, pre, branches })
}

fn ground_atom(domain: &Domain, objects: &[TypedName], e: &Sexpr) -> Result<GroundAtom, PddlError> {
    let items = expect_list(e, "a ground atom")?;
    let pos = e.pos();
    let head = items.first().ok_or_else(|| PddlError::syntax(pos, "empty atom"))?;
    let name = expect_atom(head, "a predicate name")?;
    let pred = domain.predicate(name).ok_or_else(|| PddlError::UndeclaredPredicate {
        name: name.to_string(),
        line: pos.line,
        col: pos.col,
    })?;
    let args = &items[1..];
    if args.len() != pred.params.len() {
        return Err(PddlError::ArityMismatch {
            predicate: pred.name.clone(),
            expected: pred.params.len(),
            found: args.len(),
            line: pos.line,
            col: pos.col,
        });
    }
    let mut out = Vec::with_capacity(args.len());
    for (a, slot) in args.iter().zip(&pred.params) {
        let tok = expect_atom(a, "an object name")?;
        let ap = a.pos();
        let obj = objects.iter().find(|o| o.name.eq_ignore_ascii_case(tok)).ok_or_else(|| {
            PddlError::UndeclaredObject { name: tok.to_string(), line: ap.line, col: ap.col }
        })?;
        if !domain.types.is_subtype(&obj.ty, &slot.ty) {
            return Err(PddlError::TypeMismatch {
                object: obj.name.clone(),
                found: obj.ty.clone(),
                expected: slot.ty.clone(),
                predicate: pred.name.clone(),
                line: ap.line,
                col: ap.col,
            });
        }
        out.push(obj.name.clone());
    }
    Ok(GroundAtom { predicate: pred.name.clone(), args: out })
}

pub fn parse_problem(text: &str, domain: &Domain) -> Result<ObjectUniverse, PddlError> {
    let mut storage = Vec::new();
    let (name, sections) = define_block(text, "problem", &mut storage)?;
    let mut universe = ObjectUniverse { name, domain: String::new(), objects: Vec::new(), init: Vec::new(), goal: Vec::new() };
    let mut init_exprs: &[Sexpr] = &[];
    let mut goal_expr = None;
    for section in sections {
        let items = expect_list(section, "a problem section")?;
        let head = items.first().and_then(Sexpr::as_atom).unwrap_or("");
        match head.to_ascii_lowercase().as_str() {
            ":domain" => {
                let d = items.get(1).ok_or_else(|| PddlError::syntax(section.pos(), "missing domain name"))?;
                universe.domain = expect_atom(d, "a domain name")?.to_string();
            }
            ":objects" => {
                for (o, pos) in typed_list(&items[1..])? {
                    check_type(&domain.types, &o.ty, pos)?;
                    if universe.object(&o.name).is_some() {
                        return Err(PddlError::syntax(pos, format!("duplicate object `{}`", o.name)));
                    }
                    universe.objects.push(o);
                }
            }
            ":init" => init_exprs = &items[1..],
            ":goal" => {
                goal_expr = Some(items.get(1).ok_or_else(|| PddlError::syntax(section.pos(), "missing goal"))?);
            }
            _ => return Err(PddlError::syntax(section.pos(), format!("unsupported problem section `{head}`"))),
        }
    }
    if !universe.domain.eq_ignore_ascii_case(&domain.name) {
        return Err(PddlError::DomainMismatch { expected: domain.name.clone(), found: universe.domain.clone() });
    }
    for e in init_exprs {
        universe.init.push(ground_atom(domain, &universe.objects, e)?);
    }
    if let Some(g) = goal_expr {
        match g.as_list() {
            Some([]) => {}
            Some(items) if items[0].is_keyword("and") => {
                for e in &items[1..] {
                    universe.goal.push(ground_atom(domain, &universe.objects, e)?);
                }
            }
            Some(_) => universe.goal.push(ground_atom(domain, &universe.objects, g)?),
            None => return Err(PddlError::syntax(g.pos(), "expected a goal condition")),
        }
    }
    Ok(universe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::rational::ratio;

    #[test]
    fn logistics_actions_parse_to_three_schemas() {
        let d = parse_domain(instances::LOGISTICS_DOMAIN).unwrap();
        let names: Vec<_> = d.schemas.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["Load", "Unload", "Move"]);
        let load = &d.schemas[0];
        assert_eq!(load.params.len(), 3);
        assert_eq!(load.pre.len(), 2);
        assert!(load.is_classical());
        assert_eq!(load.branches[0].add.len(), 1);
        assert_eq!(load.branches[0].del.len(), 1);
        assert_eq!(d.schemas[2].pre.len(), 1);
    }

    #[test]
    fn empty_domain_has_no_schemas() {
        let d = parse_domain("(define (domain empty) (:predicates))").unwrap();
        assert!(d.schemas.is_empty());
    }

    #[test]
    fn probabilistic_effect_branches() {
        let text = "(define (domain d) (:types thing) (:predicates (in ?p - thing ?t - thing))
            (:action a :parameters (?p ?t - thing) :precondition (and)
              :effect (probabilistic 4/5 (and (in ?p ?t)) 1/5 (and))))";
        let d = parse_domain(text).unwrap();
        let b = &d.schemas[0].branches;
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].prob, ratio(4, 5));
        assert_eq!(b[1].prob, ratio(1, 5));
        assert!(b[1].add.is_empty() && b[1].del.is_empty());
    }

    #[test]
    fn grouped_and_decimal_probabilities() {
        let text = "(define (domain d) (:predicates (p))
            (:action a :parameters () :effect (probabilistic (0.25 (and (p))) (0.75 (and)))))";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.schemas[0].branches[0].prob, ratio(1, 4));
    }

    #[test]
    fn probability_sum_is_checked() {
        let text = "(define (domain d) (:predicates (p))
            (:action a :parameters () :effect (probabilistic 1/2 (and (p)) 1/3 (and))))";
        let err = parse_domain(text).unwrap_err();
        assert!(matches!(&err, PddlError::BadProbability { msg, .. } if msg.contains("5/6")), "{err}");
    }

    #[test]
    fn domain_errors() {
        let unknown = "(define (domain d) (:predicates (p ?x - widget)))";
        assert!(matches!(parse_domain(unknown), Err(PddlError::UnknownType { .. })));
        let arity = "(define (domain d) (:predicates (p ?x))
            (:action a :parameters (?x) :precondition (and (p ?x ?x)) :effect (and)))";
        assert!(matches!(parse_domain(arity), Err(PddlError::ArityMismatch { expected: 1, found: 2, .. })));
        let unbound = "(define (domain d) (:predicates (p ?x))
            (:action a :parameters () :precondition (and (p ?y)) :effect (and)))";
        assert!(matches!(parse_domain(unbound), Err(PddlError::UnboundVariable { .. })));
        let cond = "(define (domain d) (:predicates (p))
            (:action a :parameters () :effect (and (when (p) (p)))))";
        assert!(matches!(parse_domain(cond), Err(PddlError::Syntax { .. })));
        let neg = "(define (domain d) (:predicates (p))
            (:action a :parameters () :precondition (not (p)) :effect (and)))";
        assert!(matches!(parse_domain(neg), Err(PddlError::Syntax { .. })));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_domain("(define (domain d)\n  (:predicates (p)\n").unwrap_err();
        assert!(matches!(err, PddlError::Syntax { line: 2, col: 3, .. }), "{err}");
        let err = parse_domain("(define (domain d)\n  (:frobnicate))").unwrap_err();
        assert!(matches!(err, PddlError::Syntax { line: 2, col: 3, .. }), "{err}");
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let d = parse_domain("(DEFINE (DOMAIN d) (:PREDICATES (p)) (:ACTION a :PARAMETERS () :EFFECT (AND (P))))");
        assert_eq!(d.unwrap().schemas.len(), 1);
    }

    #[test]
    fn logistics_problem() {
        let d = parse_domain(instances::LOGISTICS_DOMAIN).unwrap();
        let p = parse_problem(instances::LOGISTICS_PROBLEM, &d).unwrap();
        let init: Vec<_> = p.init.iter().map(GroundAtom::fact_name).collect();
        assert_eq!(init, ["at(P,L)", "at(A,R)", "at(B,R)"]);
        let goal: Vec<_> = p.goal.iter().map(GroundAtom::fact_name).collect();
        assert_eq!(goal, ["at(P,R)"]);
    }

    #[test]
    fn problem_errors_and_empty_goal() {
        let d = parse_domain(instances::LOGISTICS_DOMAIN).unwrap();
        let empty_goal = "(define (problem p) (:domain simplified-logistics) (:objects L - location) (:init) (:goal (and)))";
        assert!(parse_problem(empty_goal, &d).unwrap().goal.is_empty());
        let undeclared = "(define (problem p) (:domain simplified-logistics)
            (:objects L - location A - truck) (:init (at C L)) (:goal (and)))";
        assert!(matches!(parse_problem(undeclared, &d), Err(PddlError::UndeclaredObject { name, .. }) if name == "C"));
        let wrong = "(define (problem p) (:domain other) (:objects) (:init) (:goal (and)))";
        assert!(matches!(parse_problem(wrong, &d), Err(PddlError::DomainMismatch { .. })));
        let badpred = "(define (problem p) (:domain simplified-logistics) (:objects) (:init (on)) (:goal (and)))";
        assert!(matches!(parse_problem(badpred, &d), Err(PddlError::UndeclaredPredicate { .. })));
    }
}
