//! Connection sets and weighting-function feasibility.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde_json::{json, Value};

use super::{Partition, WfaWeights};
use crate::rational::{ratio, Prob};
use crate::statespace::ExplicitMdp;

/// `C^a_{s̄,s̄'}`: members of `s̄` from which `a` moves positive mass into `s̄' != s̄`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CSetIndex {
    /// Keyed by `(s̄, a, s̄')`; only nonempty sets are stored.
    pub sets: BTreeMap<(usize, usize, usize), Vec<usize>>,
    /// Members moving positive mass into goal states of `s̄'`; nonempty only.
    pub goal_sets: BTreeMap<(usize, usize, usize), Vec<usize>>,
    /// Members of `s̄` where `a` is applicable.
    pub applicable: BTreeMap<(usize, usize), Vec<usize>>,
}

impl CSetIndex {
    pub fn get(&self, sbar: usize, a: usize, target: usize) -> &[usize] {
        self.sets.get(&(sbar, a, target)).map_or(&[], Vec::as_slice)
    }

    pub fn goal_refinement(&self, sbar: usize, a: usize, target: usize) -> &[usize] {
        self.goal_sets.get(&(sbar, a, target)).map_or(&[], Vec::as_slice)
    }

    /// All C-sets of one class as `((a, s̄'), members)`.
    pub fn of_class(&self, sbar: usize) -> Vec<((usize, usize), &[usize])> {
        self.sets.range((sbar, 0, 0)..(sbar + 1, 0, 0)).map(|(&(_, a, t), v)| ((a, t), v.as_slice())).collect()
    }

    /// Target C-sets of one `(s̄, a)` pair as `(s̄', members)`.
    pub fn of_pair(&self, sbar: usize, a: usize) -> Vec<(usize, &[usize])> {
        self.sets.range((sbar, a, 0)..(sbar, a + 1, 0)).map(|(&(_, _, t), v)| (t, v.as_slice())).collect()
    }
}

pub fn compute_csets(m: &ExplicitMdp, p: &Partition) -> CSetIndex {
    let mut out = CSetIndex::default();
    for (s, rows) in m.rows.iter().enumerate() {
        let c = p.class_of(s);
        for r in rows {
            out.applicable.entry((c, r.action)).or_default().push(s);
            let mut to_class: BTreeSet<usize> = BTreeSet::new();
            let mut to_goal: BTreeSet<usize> = BTreeSet::new();
            for (t, prob) in &r.successors {
                let tc = p.class_of(*t);
                if tc != c && *prob > Prob::zero() {
                    to_class.insert(tc);
                    if m.is_goal(*t) {
                        to_goal.insert(tc);
                    }
                }
            }
            for tc in to_class {
                out.sets.entry((c, r.action, tc)).or_default().push(s);
            }
            for tc in to_goal {
                out.goal_sets.entry((c, r.action, tc)).or_default().push(s);
            }
        }
    }
    out
}

/// Constraint family of one class whose C-sets share no member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassConflict {
    pub class: usize,
    /// Every C-set of the class as `((a, s̄'), members)`.
    pub csets: Vec<((usize, usize), Vec<usize>)>,
    /// Indices into `csets` of an irreducible subfamily with empty intersection.
    pub core: Vec<usize>,
}

impl ClassConflict {
    /// Constraints as text, e.g. `ω(s6)+ω(s8)=1`.
    pub fn constraints(&self, m: &ExplicitMdp) -> Vec<String> {
        self.csets
            .iter()
            .map(|(_, ms)| {
                let terms: Vec<String> = ms.iter().map(|&s| format!("ω({})", m.states[s].id)).collect();
                format!("{}=1", terms.join("+"))
            })
            .collect()
    }

    pub fn to_json(&self, m: &ExplicitMdp, p: &Partition) -> Value {
        let set = |(a, t): &(usize, usize), ms: &[usize]| {
            json!({
                "action": m.actions[*a].name,
                "sbar_prime": p.name(*t),
                "members": ms.iter().map(|&s| m.states[s].id.clone()).collect::<Vec<_>>(),
            })
        };
        json!({
            "sbar": p.name(self.class),
            "csets": self.csets.iter().map(|(k, ms)| set(k, ms)).collect::<Vec<_>>(),
            "constraints": self.constraints(m),
            "core": self.core.iter().map(|&i| set(&self.csets[i].0, &self.csets[i].1)).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WfaFeasibility {
    Feasible(WfaWeights),
    /// `partial` holds the weights of the classes that are satisfiable and
    /// empty maps for the conflicting ones.
    Infeasible { conflicts: Vec<ClassConflict>, partial: WfaWeights },
}

fn intersect(sets: &[&[usize]]) -> BTreeSet<usize> {
    let mut it = sets.iter();
    let mut acc: BTreeSet<usize> = match it.next() {
        Some(first) => first.iter().copied().collect(),
        None => return BTreeSet::new(),
    };
    for s in it {
        acc.retain(|x| s.contains(x));
    }
    acc
}

fn uniform(members: &[usize]) -> BTreeMap<usize, Prob> {
    let w = ratio(1, members.len() as i64);
    members.iter().map(|&s| (s, w.clone())).collect()
}

/// One distribution per class with unit weight on every C-set exists iff the
/// class's C-sets intersect; the result is uniform over that intersection.
pub fn wfa_feasibility(cs: &CSetIndex, p: &Partition) -> WfaFeasibility {
    let mut weights = Vec::with_capacity(p.num_classes());
    let mut conflicts = Vec::new();
    for c in 0..p.num_classes() {
        let family = cs.of_class(c);
        if family.is_empty() {
            weights.push(uniform(p.members(c)));
            continue;
        }
        let sets: Vec<&[usize]> = family.iter().map(|(_, v)| *v).collect();
        let common: Vec<usize> = intersect(&sets).into_iter().collect();
        if common.is_empty() {
            let mut core: Vec<usize> = (0..sets.len()).collect();
            let mut i = 0;
            while i < core.len() {
                let rest: Vec<&[usize]> =
                    core.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &k)| sets[k]).collect();
                if !rest.is_empty() && intersect(&rest).is_empty() {
                    core.remove(i);
                } else {
                    i += 1;
                }
            }
            conflicts.push(ClassConflict {
                class: c,
                csets: family.iter().map(|(k, v)| (*k, v.to_vec())).collect(),
                core,
            });
            weights.push(BTreeMap::new());
        } else {
            weights.push(uniform(&common));
        }
    }
    if conflicts.is_empty() {
        WfaFeasibility::Feasible(weights)
    } else {
        WfaFeasibility::Infeasible { conflicts, partial: weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{self, PACKAGE_PATTERN};
    use crate::projection::Pattern;
    use crate::statespace::{default_gamma, expand, load_graph};

    fn ids(m: &ExplicitMdp, xs: &[usize]) -> Vec<String> {
        let mut v: Vec<String> = xs.iter().map(|&s| m.states[s].label.clone()).collect();
        v.sort();
        v
    }

    fn sas(m: &ExplicitMdp, s: usize) -> String {
        let v = &m.vectors.as_ref().unwrap()[s];
        let pkg = ["L", "R", "A", "B"][(0..4).find(|&i| v.get(i)).unwrap()];
        format!("{pkg}{}{}", if v.get(4) { "L" } else { "R" }, if v.get(6) { "L" } else { "R" })
    }

    fn logistics() -> (ExplicitMdp, Partition) {
        let t = instances::logistics().unwrap();
        let m = expand(&t, &default_gamma()).unwrap();
        let p = Partition::by_pattern(&m, &Pattern::from_names(&PACKAGE_PATTERN, &t.facts).unwrap()).unwrap();
        (m, p)
    }

    #[test]
    fn logistics_csets() {
        let (m, p) = logistics();
        let cs = compute_csets(&m, &p);
        let named = |a: &str, s: usize, t: usize| {
            let mut v: Vec<String> = cs.get(s, m.action_index(a).unwrap(), t).iter().map(|&x| sas(&m, x)).collect();
            v.sort();
            v
        };
        assert_eq!(named("Load(L,P,A)", 0, 1), ["LLL", "LLR"]);
        assert_eq!(named("Load(L,P,B)", 0, 2), ["LLL", "LRL"]);
        assert_eq!(named("Unload(R,P,A)", 1, 3), ["ARL", "ARR"]);
        assert_eq!(named("Unload(R,P,B)", 2, 3), ["BLR", "BRR"]);
        assert_eq!(named("Load(R,P,A)", 3, 1), ["RRL", "RRR"]);
        assert_eq!(named("Load(R,P,B)", 3, 2), ["RLR", "RRR"]);
        assert_eq!(named("Unload(L,P,A)", 1, 0), ["ALL", "ALR"]);
        assert_eq!(named("Unload(L,P,B)", 2, 0), ["BLL", "BRL"]);
        assert_eq!(cs.sets.len(), 8);
        let u = m.action_index("Unload(R,P,A)").unwrap();
        assert_eq!(cs.goal_refinement(1, u, 3), cs.get(1, u, 3));
        // rebuilding is deterministic and every member satisfies the definition
        assert_eq!(compute_csets(&m, &p), cs);
        for (&(c, a, t), ms) in &cs.sets {
            for &s in ms {
                assert_eq!(p.class_of(s), c);
                assert!(p.class_mass(m.row(s, a).unwrap()).get(&t).is_some_and(|x| *x > Prob::zero()));
            }
        }
    }

    #[test]
    fn logistics_wfa_conflicts_in_truck_classes() {
        let (m, p) = logistics();
        let WfaFeasibility::Infeasible { conflicts, partial } = wfa_feasibility(&compute_csets(&m, &p), &p) else {
            panic!()
        };
        // s̄0 and s̄3 intersect; in s̄1 and s̄2 the unload C-sets split by truck position
        let support: Vec<String> = partial[0].keys().map(|&s| sas(&m, s)).collect();
        assert_eq!(support, ["LLL"]);
        let support: Vec<String> = partial[3].keys().map(|&s| sas(&m, s)).collect();
        assert_eq!(support, ["RRR"]);
        assert_eq!(conflicts.iter().map(|c| c.class).collect::<Vec<_>>(), [1, 2]);
        let sets: Vec<Vec<String>> = conflicts[0].csets.iter().map(|(_, ms)| ids_sas(&m, ms)).collect();
        assert_eq!(sets, [vec!["ALL", "ALR"], vec!["ARL", "ARR"]]);
    }

    fn ids_sas(m: &ExplicitMdp, xs: &[usize]) -> Vec<String> {
        let mut v: Vec<String> = xs.iter().map(|&s| sas(m, s)).collect();
        v.sort();
        v
    }

    #[test]
    fn counterexample_wfa_is_infeasible() {
        let m = load_graph(instances::COUNTEREXAMPLE_GRAPH).unwrap();
        let p = Partition::by_pattern(&m, &Pattern::from_names(&["p1", "p2"], m.facts.as_ref().unwrap()).unwrap()).unwrap();
        let cs = compute_csets(&m, &p);
        let a = m.action_index("a").unwrap();
        assert_eq!(ids(&m, cs.get(1, a, 0)).len(), 2);
        let WfaFeasibility::Infeasible { conflicts, .. } = wfa_feasibility(&cs, &p) else { panic!() };
        assert_eq!(conflicts.len(), 1);
        let c = &conflicts[0];
        assert_eq!(c.class, 1);
        let sets: Vec<Vec<&str>> =
            c.csets.iter().map(|(_, ms)| ms.iter().map(|&s| m.states[s].id.as_str()).collect()).collect();
        assert_eq!(sets, [vec!["s6", "s8"], vec!["s6"], vec!["s8"]]);
        assert_eq!(c.constraints(&m), ["ω(s6)+ω(s8)=1", "ω(s6)=1", "ω(s8)=1"]);
        assert_eq!(c.core, [1, 2]);
    }

    #[test]
    fn class_without_csets_gets_uniform_weights() {
        let m = load_graph(r#"{"states":[{"id":"x"},{"id":"y"}],"actions":[],"transitions":[]}"#).unwrap();
        let p = Partition::from_assignment(&m, vec![0, 0]).unwrap();
        let WfaFeasibility::Feasible(w) = wfa_feasibility(&compute_csets(&m, &p), &p) else { panic!() };
        assert_eq!(w[0].values().cloned().collect::<Vec<_>>(), [ratio(1, 2), ratio(1, 2)]);
    }
}
