//! Weighted and interval abstract MDPs.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{AbstractMdp, AbstractionError, CSetIndex, IntervalRow, Partition, Provenance, Transitions};
use crate::par::{self, Execution};
use crate::rational::{format_rational, ratio, Prob};
use crate::statespace::{ExplicitMdp, Row};

/// `ω_{s̄}` for each class, indexed by class.
pub type WfaWeights = Vec<BTreeMap<usize, Prob>>;
/// `ξ_{s̄,a}` keyed by `(s̄, a)`.
pub type ArmdpWeights = BTreeMap<(usize, usize), BTreeMap<usize, Prob>>;

fn finish_row(action: usize, mass: BTreeMap<usize, Prob>, reward: Prob) -> Option<Row> {
    let successors: Vec<(usize, Prob)> = mass.into_iter().filter(|(_, p)| !p.is_zero()).collect();
    if successors.is_empty() {
        None
    } else {
        Some(Row { action, successors, reward })
    }
}

/// Actions applicable in at least one member of class `c`, in index order.
fn class_actions(m: &ExplicitMdp, p: &Partition, c: usize) -> Vec<usize> {
    let set: BTreeSet<usize> = p.members(c).iter().flat_map(|&s| m.rows[s].iter().map(|r| r.action)).collect();
    set.into_iter().collect()
}

fn assemble(m: &ExplicitMdp, p: &Partition, transitions: Transitions, provenance: Provenance) -> AbstractMdp {
    AbstractMdp {
        states: p.abstract_states(),
        actions: m.actions.clone(),
        transitions,
        init: if m.num_states() == 0 { 0 } else { p.class_of(m.init) },
        gamma: m.gamma.clone(),
        provenance,
    }
}

/// `T(s̄'|s̄,a) = Σ_s ω_{s̄}(s) Σ_{s'∈s̄'} T(s'|s,a)`, rewards averaged alike.
pub fn build_wfa(m: &ExplicitMdp, p: &Partition, w: &WfaWeights) -> AbstractMdp {
    build_wfa_with(m, p, w, Execution::available())
}

pub fn build_wfa_with(m: &ExplicitMdp, p: &Partition, w: &WfaWeights, exec: Execution) -> AbstractMdp {
    let rows = par::map_range(exec, p.num_classes(), |c| {
        let mut out = Vec::new();
        for a in class_actions(m, p, c) {
            let mut mass: BTreeMap<usize, Prob> = BTreeMap::new();
            let mut reward = Prob::zero();
            for (&s, weight) in &w[c] {
                if let Some(r) = m.row(s, a) {
                    for (tc, q) in p.class_mass(r) {
                        *mass.entry(tc).or_insert_with(Prob::zero) += weight * q;
                    }
                    reward += weight * &r.reward;
                }
            }
            out.extend(finish_row(a, mass, reward));
        }
        out
    });
    assemble(m, p, Transitions::Point(rows), Provenance::Wfa)
}

/// Like `build_wfa` with a separate distribution per `(s̄, a)`.
pub fn build_armdp(m: &ExplicitMdp, p: &Partition, x: &ArmdpWeights) -> AbstractMdp {
    let empty = BTreeMap::new();
    let rows = par::map_range(Execution::available(), p.num_classes(), |c| {
        let mut out = Vec::new();
        for a in class_actions(m, p, c) {
            let xi = x.get(&(c, a)).unwrap_or(&empty);
            let mut mass: BTreeMap<usize, Prob> = BTreeMap::new();
            let mut reward = Prob::zero();
            for &s in p.members(c) {
                let (Some(weight), Some(r)) = (xi.get(&s), m.row(s, a)) else { continue };
                for (t, q) in &r.successors {
                    *mass.entry(p.class_of(*t)).or_insert_with(Prob::zero) += weight * q;
                }
                reward += weight * &r.reward;
            }
            out.extend(finish_row(a, mass, reward));
        }
        out
    });
    assemble(m, p, Transitions::Point(rows), Provenance::Armdp)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiChoice {
    pub weights: ArmdpWeights,
    pub warnings: Vec<String>,
}

fn uniform(members: &[usize]) -> BTreeMap<usize, Prob> {
    let w = ratio(1, members.len() as i64);
    members.iter().map(|&s| (s, w.clone())).collect()
}

/// Strict `default_xi_with`: refuses when target C-sets of a pair differ.
pub fn default_xi(m: &ExplicitMdp, cs: &CSetIndex, p: &Partition) -> Result<XiChoice, AbstractionError> {
    default_xi_with(m, cs, p, false)
}

/// Uniform over the members reaching goal states when there are any, else
/// uniform over the C-set; pairs whose mass never leaves the class get
/// uniform weight over their applicable members.
///
/// With `allow_ambiguity`, pairs whose targets have different C-sets fall
/// back to their common members (or, if none, to the goal members or the
/// union) and a warning is recorded.
pub fn default_xi_with(
    m: &ExplicitMdp,
    cs: &CSetIndex,
    p: &Partition,
    allow_ambiguity: bool,
) -> Result<XiChoice, AbstractionError> {
    let mut weights = ArmdpWeights::new();
    let mut warnings = Vec::new();
    for (&(c, a), applicable) in &cs.applicable {
        let targets = cs.of_pair(c, a);
        if targets.is_empty() {
            weights.insert((c, a), uniform(applicable));
            continue;
        }
        let goal: BTreeSet<usize> =
            targets.iter().flat_map(|&(t, _)| cs.goal_refinement(c, a, t).iter().copied()).collect();
        let first = targets[0].1;
        let agree = targets.iter().all(|(_, ms)| *ms == first);
        let support: Vec<usize> = if agree {
            if goal.is_empty() { first.to_vec() } else { goal.into_iter().collect() }
        } else {
            let detail = targets
                .iter()
                .map(|(t, ms)| {
                    let ids: Vec<&str> = ms.iter().map(|&s| m.states[s].id.as_str()).collect();
                    format!("{}: {{{}}}", p.name(*t), ids.join(","))
                })
                .collect::<Vec<_>>()
                .join("; ");
            if !allow_ambiguity {
                return Err(AbstractionError::Ambiguous {
                    sbar: p.name(c).to_string(),
                    action: m.actions[a].name.clone(),
                    detail,
                });
            }
            let mut common: BTreeSet<usize> = first.iter().copied().collect();
            for (_, ms) in &targets[1..] {
                common.retain(|s| ms.contains(s));
            }
            let goal_common: Vec<usize> = goal.intersection(&common).copied().collect();
            let pair = format!("({}, {})", p.name(c), m.actions[a].name);
            if !goal_common.is_empty() {
                goal_common
            } else if !common.is_empty() {
                if !goal.is_empty() {
                    warnings.push(format!("{pair}: goal-reaching members share no target C-set; goal priority dropped ({detail})"));
                }
                common.into_iter().collect()
            } else {
                warnings.push(format!(
                    "{pair}: target C-sets are disjoint, so no weighting puts unit mass on all of them ({detail})"
                ));
                if goal.is_empty() {
                    targets.iter().flat_map(|(_, ms)| ms.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect()
                } else {
                    goal.into_iter().collect()
                }
            }
        };
        weights.insert((c, a), uniform(&support));
    }
    Ok(XiChoice { weights, warnings })
}

/// Per `(s̄, a, s̄')` the `[min, max]` over all members of `s̄` of the mass
/// entering `s̄'`; members where `a` is inapplicable contribute 0.
pub fn build_abpmdp(m: &ExplicitMdp, p: &Partition) -> AbstractMdp {
    let rows = par::map_range(Execution::available(), p.num_classes(), |c| {
        let members = p.members(c);
        let mut out = Vec::new();
        for a in class_actions(m, p, c) {
            let per_member: Vec<(BTreeMap<usize, Prob>, Prob)> = members
                .iter()
                .map(|&s| match m.row(s, a) {
                    Some(r) => (p.class_mass(r), r.reward.clone()),
                    None => (BTreeMap::new(), Prob::zero()),
                })
                .collect();
            let targets: BTreeSet<usize> = per_member.iter().flat_map(|(mass, _)| mass.keys().copied()).collect();
            let successors = targets
                .into_iter()
                .map(|t| {
                    let vals: Vec<Prob> =
                        per_member.iter().map(|(mass, _)| mass.get(&t).cloned().unwrap_or_else(Prob::zero)).collect();
                    let lo = vals.iter().min().unwrap().clone();
                    let hi = vals.iter().max().unwrap().clone();
                    (t, lo, hi)
                })
                .collect();
            let rlo = per_member.iter().map(|(_, r)| r).min().unwrap().clone();
            let rhi = per_member.iter().map(|(_, r)| r).max().unwrap().clone();
            out.push(IntervalRow { action: a, successors, reward: (rlo, rhi) });
        }
        out
    });
    assemble(m, p, Transitions::Interval(rows), Provenance::Abpmdp)
}

/// Point model taking the upper end of every interval.
pub fn select_max(am: &AbstractMdp) -> Result<AbstractMdp, AbstractionError> {
    let rows = am.interval_rows().ok_or(AbstractionError::NotIntervalValued)?;
    let mut out = Vec::with_capacity(rows.len());
    for (s, rs) in rows.iter().enumerate() {
        let mut point = Vec::new();
        for r in rs {
            let successors: Vec<(usize, Prob)> =
                r.successors.iter().filter(|(_, _, hi)| !hi.is_zero()).map(|(t, _, hi)| (*t, hi.clone())).collect();
            if successors.is_empty() {
                continue;
            }
            let total: Prob = successors.iter().map(|(_, q)| q).sum();
            if !total.is_one() {
                return Err(AbstractionError::NonRepresentable {
                    sbar: am.states[s].id.clone(),
                    action: am.actions[r.action].name.clone(),
                    sum: format_rational(&total),
                });
            }
            point.push(Row { action: r.action, successors, reward: r.reward.1.clone() });
        }
        out.push(point);
    }
    Ok(AbstractMdp { transitions: Transitions::Point(out), provenance: Provenance::AbpmdpMax, ..am.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{compute_csets, wfa_feasibility, WfaFeasibility};
    use crate::instances::{self, PACKAGE_PATTERN};
    use crate::projection::Pattern;
    use crate::rational::{one, zero};
    use crate::statespace::{default_gamma, expand, load_graph};

    fn setup(prob: bool) -> (ExplicitMdp, Partition) {
        let t = if prob { instances::probabilistic_logistics() } else { instances::logistics() }.unwrap();
        let m = expand(&t, &default_gamma()).unwrap();
        let p = Partition::by_pattern(&m, &Pattern::from_names(&PACKAGE_PATTERN, &t.facts).unwrap()).unwrap();
        (m, p)
    }

    fn entry(am: &AbstractMdp, s: usize, a: &str, t: usize) -> Prob {
        let row = am.point_row(s, am.action_index(a).unwrap()).unwrap();
        row.successors.iter().find(|(x, _)| *x == t).map(|(_, q)| q.clone()).unwrap_or_else(zero)
    }

    #[test]
    fn wfa_rows() {
        let (m, p) = setup(false);
        let WfaFeasibility::Infeasible { partial: mut w, .. } = wfa_feasibility(&compute_csets(&m, &p), &p) else {
            panic!()
        };
        for c in 0..4 {
            if w[c].is_empty() {
                w[c] = uniform(p.members(c));
            }
        }
        let am = build_wfa(&m, &p, &w);
        assert_eq!(entry(&am, 0, "Load(L,P,A)", 1), one());
        let uniform_w: WfaWeights = (0..4).map(|c| uniform(p.members(c))).collect();
        let am = build_wfa(&m, &p, &uniform_w);
        assert_eq!(entry(&am, 0, "Load(L,P,A)", 1), ratio(1, 2));
        let id = Partition::identity(&m);
        let idw: WfaWeights = (0..m.num_states()).map(|s| uniform(&[s])).collect();
        let am = build_wfa(&m, &id, &idw);
        assert_eq!(am.point_rows().unwrap(), m.rows.as_slice());
        assert_eq!(build_wfa_with(&m, &p, &w, Execution::Sequential), build_wfa(&m, &p, &w));
    }

    #[test]
    fn default_xi_on_logistics() {
        let (m, p) = setup(false);
        let cs = compute_csets(&m, &p);
        let xi = default_xi(&m, &cs, &p).unwrap();
        assert!(xi.warnings.is_empty());
        for (&(c, a, _), members) in &cs.sets {
            let w = &xi.weights[&(c, a)];
            assert_eq!(w.keys().copied().collect::<Vec<_>>(), *members);
            assert!(w.values().all(|v| *v == ratio(1, 2)));
        }
        let am = build_armdp(&m, &p, &xi.weights);
        assert_eq!(entry(&am, 0, "Load(L,P,A)", 1), one());
        assert_eq!(entry(&am, 1, "Unload(R,P,A)", 3), one());
        let u = am.action_index("Unload(R,P,A)").unwrap();
        assert_eq!(am.point_row(1, u).unwrap().reward, one());
    }

    #[test]
    fn default_xi_on_counterexample_prefers_goal_member() {
        let m = load_graph(instances::COUNTEREXAMPLE_GRAPH).unwrap();
        let p = Partition::by_pattern(&m, &Pattern::from_names(&["p1", "p2"], m.facts.as_ref().unwrap()).unwrap()).unwrap();
        let xi = default_xi(&m, &compute_csets(&m, &p), &p).unwrap();
        let a = m.action_index("a").unwrap();
        let s8 = m.state_index("s8").unwrap();
        assert_eq!(xi.weights[&(1, a)], BTreeMap::from([(s8, one())]));
        let b = m.action_index("b").unwrap();
        assert_eq!(xi.weights[&(1, b)], BTreeMap::from([(m.state_index("s6").unwrap(), one())]));
    }

    #[test]
    fn ambiguous_pairs_are_refused_or_warned() {
        let g = r#"{"states":[{"id":"s1"},{"id":"s2"},{"id":"t1"},{"id":"t2","goal":true}],
            "actions":["a"],
            "transitions":[{"from":"s1","action":"a","to":[["t1",1]]},{"from":"s2","action":"a","to":[["t2",1]]}]}"#;
        let m = load_graph(g).unwrap();
        let p = Partition::from_assignment(&m, vec![0, 0, 1, 2]).unwrap();
        let cs = compute_csets(&m, &p);
        assert!(matches!(default_xi(&m, &cs, &p), Err(AbstractionError::Ambiguous { .. })));
        let lenient = default_xi_with(&m, &cs, &p, true).unwrap();
        assert_eq!(lenient.warnings.len(), 1);
        assert_eq!(lenient.weights[&(0, 0)], BTreeMap::from([(1, one())]));
    }

    #[test]
    fn probabilistic_armdp_ignores_xi_choice() {
        let (m, p) = setup(true);
        let cs = compute_csets(&m, &p);
        let mut xi = default_xi(&m, &cs, &p).unwrap().weights;
        let am = build_armdp(&m, &p, &xi);
        assert_eq!(entry(&am, 0, "Load(L,P,A)", 1), ratio(4, 5));
        let a = m.action_index("Load(L,P,A)").unwrap();
        let members = cs.get(0, a, 1).to_vec();
        xi.insert((0, a), BTreeMap::from([(members[0], ratio(1, 3)), (members[1], ratio(2, 3))]));
        assert_eq!(entry(&build_armdp(&m, &p, &xi), 0, "Load(L,P,A)", 1), ratio(4, 5));
    }

    #[test]
    fn abpmdp_intervals_and_max_selection() {
        let (m, p) = setup(false);
        let am = build_abpmdp(&m, &p);
        let a = am.action_index("Load(L,P,A)").unwrap();
        let row = am.interval_row(0, a).unwrap();
        assert_eq!(row.successors, vec![(1, zero(), one())]);
        let max = select_max(&am).unwrap();
        assert_eq!(max.provenance, Provenance::AbpmdpMax);
        assert_eq!(entry(&max, 0, "Load(L,P,A)", 1), one());

        let (pm, pp) = setup(true);
        let pam = build_abpmdp(&pm, &pp);
        let row = pam.interval_row(0, a).unwrap();
        assert_eq!(row.successors, vec![(0, zero(), ratio(1, 5)), (1, zero(), ratio(4, 5))]);
        let pmax = select_max(&pam).unwrap();
        assert_eq!(entry(&pmax, 0, "Load(L,P,A)", 0), ratio(1, 5));
        assert_eq!(entry(&pmax, 0, "Load(L,P,A)", 1), ratio(4, 5));

        let id = build_abpmdp(&m, &Partition::identity(&m));
        assert!(id.interval_rows().unwrap().iter().flatten().all(|r| r.successors.iter().all(|(_, lo, hi)| lo == hi)));
        assert_eq!(select_max(&id).unwrap().point_rows().unwrap(), m.rows.as_slice());
        assert!(matches!(select_max(&max), Err(AbstractionError::NotIntervalValued)));
    }

    #[test]
    fn select_max_reports_bad_sums() {
        let g = r#"{"states":[{"id":"x"},{"id":"y"},{"id":"u"},{"id":"v"}],"actions":["a"],
            "transitions":[{"from":"x","action":"a","to":[["u",1]]},{"from":"y","action":"a","to":[["v",1]]}]}"#;
        let m = load_graph(g).unwrap();
        let p = Partition::from_assignment(&m, vec![0, 0, 1, 2]).unwrap();
        let err = select_max(&build_abpmdp(&m, &p)).unwrap_err();
        assert!(matches!(err, AbstractionError::NonRepresentable { ref sum, .. } if sum == "2"));
    }
}
