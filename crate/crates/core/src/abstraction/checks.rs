//! Structural checks over abstractions.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde_json::json;

use super::{compute_csets, AbstractMdp, AbstractionError, Partition, Transitions};
use crate::rational::{format_rational, Prob};
use crate::report::CheckReport;
use crate::statespace::{ExplicitMdp, Row};

const CONNECTION: &str = "C-set of (s̄, a, s̄') nonempty iff the abstract transition s̄ -a-> s̄' has positive probability";
const DETERMINISTIC: &str = "every abstract transition probability is 0 or 1";
const EQUIVALENCE: &str = "abstract rows and rewards equal those of the projected task, self-loops aside";
const INDEPENDENCE: &str = "all applicable members of a class induce the same distribution over classes";
const NO_AMBIGUITY: &str = "all applicable members of a class reach the same set of classes";

/// Positive transition iff nonempty C-set, for every `(s̄, a, s̄' != s̄)`.
/// Interval models pass a triple when `upper > 0` exactly for nonempty C-sets.
pub fn check_connection_preserving(m: &ExplicitMdp, p: &Partition, am: &AbstractMdp) -> CheckReport {
    const NAME: &str = "connection_preserving";
    let cs = compute_csets(m, p);
    let mut positive: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    match &am.transitions {
        Transitions::Point(rows) => {
            for (s, rs) in rows.iter().enumerate() {
                for r in rs {
                    for (t, q) in &r.successors {
                        if *t != s && *q > Prob::zero() {
                            positive.insert((s, r.action, *t));
                        }
                    }
                }
            }
        }
        Transitions::Interval(rows) => {
            for (s, rs) in rows.iter().enumerate() {
                for r in rs {
                    for (t, _, hi) in &r.successors {
                        if *t != s && *hi > Prob::zero() {
                            positive.insert((s, r.action, *t));
                        }
                    }
                }
            }
        }
    }
    let keys: BTreeSet<(usize, usize, usize)> = cs.sets.keys().copied().chain(positive.iter().copied()).collect();
    for key @ (s, a, t) in keys {
        let has_cset = cs.sets.contains_key(&key);
        if has_cset != positive.contains(&key) {
            let reason = if has_cset { "nonempty C-set but zero abstract probability" } else { "positive abstract probability but empty C-set" };
            return CheckReport::fail(
                NAME,
                CONNECTION,
                json!({
                    "sbar": p.name(s),
                    "action": m.actions[a].name,
                    "sbar_prime": p.name(t),
                    "reason": reason,
                }),
            );
        }
    }
    CheckReport::pass(NAME, CONNECTION).with_details(json!({"triples": cs.sets.len()}))
}

pub fn check_deterministic(am: &AbstractMdp) -> Result<CheckReport, AbstractionError> {
    const NAME: &str = "deterministic";
    let rows = am.point_rows().ok_or(AbstractionError::NotPointValued)?;
    for (s, rs) in rows.iter().enumerate() {
        for r in rs {
            if let Some((t, q)) = r.successors.iter().find(|(_, q)| !q.is_zero() && !q.is_one()) {
                return Ok(CheckReport::fail(
                    NAME,
                    DETERMINISTIC,
                    json!({
                        "sbar": am.states[s].id,
                        "action": am.actions[r.action].name,
                        "sbar_prime": am.states[*t].id,
                        "probability": format_rational(q),
                    }),
                ));
            }
        }
    }
    Ok(CheckReport::pass(NAME, DETERMINISTIC))
}

fn is_self_loop(s: usize, r: &Row) -> bool {
    r.successors.iter().all(|(t, _)| *t == s)
}

fn describe_row(r: Option<&Row>, names: &dyn Fn(usize) -> String) -> serde_json::Value {
    match r {
        None => serde_json::Value::Null,
        Some(r) => json!({
            "successors": r.successors.iter().map(|(t, q)| json!([names(*t), format_rational(q)])).collect::<Vec<_>>(),
            "reward": format_rational(&r.reward),
        }),
    }
}

/// Exact equality of the rows of `planning` and `am`, matched by state index
/// and action name. Rows whose mass stays in their own state are skipped on
/// both sides.
pub fn check_equivalence(planning: &ExplicitMdp, am: &AbstractMdp) -> Result<CheckReport, AbstractionError> {
    const NAME: &str = "equivalence";
    let rows = am.point_rows().ok_or(AbstractionError::NotPointValued)?;
    if planning.num_states() != am.num_states() {
        return Ok(CheckReport::fail(
            NAME,
            EQUIVALENCE,
            json!({"reason": "state counts differ", "planning": planning.num_states(), "abstract": am.num_states()}),
        ));
    }
    let names = |t: usize| am.states[t].id.clone();
    let mut compared = 0;
    for (s, planning_rows) in planning.rows.iter().enumerate().take(am.num_states()) {
        let left: BTreeMap<&str, &Row> = planning_rows
            .iter()
            .filter(|r| !is_self_loop(s, r))
            .map(|r| (planning.actions[r.action].name.as_str(), r))
            .collect();
        let right: BTreeMap<&str, &Row> = rows[s]
            .iter()
            .filter(|r| !is_self_loop(s, r))
            .map(|r| (am.actions[r.action].name.as_str(), r))
            .collect();
        let actions: BTreeSet<&str> = left.keys().chain(right.keys()).copied().collect();
        for a in actions {
            let (l, r) = (left.get(a).copied(), right.get(a).copied());
            let same = match (l, r) {
                (Some(x), Some(y)) => x.successors == y.successors && x.reward == y.reward,
                _ => false,
            };
            if !same {
                return Ok(CheckReport::fail(
                    NAME,
                    EQUIVALENCE,
                    json!({
                        "sbar": am.states[s].id,
                        "action": a,
                        "planning": describe_row(l, &names),
                        "abstract": describe_row(r, &names),
                    }),
                ));
            }
            compared += 1;
        }
    }
    Ok(CheckReport::pass(NAME, EQUIVALENCE).with_details(json!({"equivalent": true, "rows": compared})))
}

/// `(class, action) -> [(state, mass per class)]`.
type MemberMasses = BTreeMap<(usize, usize), Vec<(usize, BTreeMap<usize, Prob>)>>;

/// Applicable members of each class with their class distributions.
fn member_masses(m: &ExplicitMdp, p: &Partition) -> MemberMasses {
    let mut out = MemberMasses::new();
    for (s, rows) in m.rows.iter().enumerate() {
        for r in rows {
            out.entry((p.class_of(s), r.action)).or_default().push((s, p.class_mass(r)));
        }
    }
    out
}

fn pair_witness(m: &ExplicitMdp, p: &Partition, c: usize, a: usize, s1: usize, s2: usize) -> serde_json::Value {
    json!({
        "sbar": p.name(c),
        "action": m.actions[a].name,
        "s1": m.states[s1].id,
        "s2": m.states[s2].id,
    })
}

/// Exact equality of the class-level successor distributions of all
/// applicable members of each class.
pub fn check_representative_independence(m: &ExplicitMdp, p: &Partition) -> CheckReport {
    const NAME: &str = "representative_independence";
    for ((c, a), ms) in member_masses(m, p) {
        let (s1, first) = &ms[0];
        if let Some((s2, _)) = ms[1..].iter().find(|(_, d)| d != first) {
            return CheckReport::fail(NAME, INDEPENDENCE, pair_witness(m, p, c, a, *s1, *s2));
        }
    }
    CheckReport::pass(NAME, INDEPENDENCE)
}

/// Equality of the sets of classes reached by all applicable members.
pub fn check_no_ambiguity(m: &ExplicitMdp, p: &Partition) -> CheckReport {
    const NAME: &str = "no_ambiguity";
    for ((c, a), ms) in member_masses(m, p) {
        let support = |d: &BTreeMap<usize, Prob>| d.keys().copied().collect::<Vec<_>>();
        let first = support(&ms[0].1);
        if let Some((s2, _)) = ms[1..].iter().find(|(_, d)| support(d) != first) {
            return CheckReport::fail(NAME, NO_AMBIGUITY, pair_witness(m, p, c, a, ms[0].0, *s2));
        }
    }
    CheckReport::pass(NAME, NO_AMBIGUITY)
}
