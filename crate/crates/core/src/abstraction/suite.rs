//! Check bundles per framework, as run by the command-line front end.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use super::{
    build_abpmdp, build_armdp, build_wfa, check_connection_preserving, check_deterministic, check_equivalence,
    check_no_ambiguity, check_representative_independence, compute_csets, default_xi, select_max, wfa_feasibility,
    AbstractMdp, AbstractionError, ArmdpWeights, Partition, WfaFeasibility, WfaWeights,
};
use crate::rational::format_rational;
use crate::report::CheckReport;
use crate::statespace::ExplicitMdp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Framework {
    Wfa,
    Armdp,
    Abpmdp,
}

impl Framework {
    pub fn as_str(self) -> &'static str {
        match self {
            Framework::Wfa => "wfa",
            Framework::Armdp => "armdp",
            Framework::Abpmdp => "abpmdp",
        }
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Framework {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "wfa" => Ok(Framework::Wfa),
            "armdp" => Ok(Framework::Armdp),
            "abpmdp" => Ok(Framework::Abpmdp),
            _ => Err(format!("unknown framework `{s}` (expected wfa, armdp or abpmdp)")),
        }
    }
}

const WFA_FEASIBLE: &str = "some per-class distribution puts unit mass on every C-set of its class";
const XI_DEFINED: &str = "one weighting per (s̄, a) puts unit mass on every target C-set";
const REPRESENTABLE: &str = "taking every interval's upper bound gives rows summing to 1";

pub fn weights_json(m: &ExplicitMdp, p: &Partition, w: &WfaWeights) -> Value {
    let mut out = Map::new();
    for (c, dist) in w.iter().enumerate() {
        let d: Map<String, Value> =
            dist.iter().map(|(s, q)| (m.states[*s].id.clone(), Value::String(format_rational(q)))).collect();
        out.insert(p.name(c).to_string(), Value::Object(d));
    }
    Value::Object(out)
}

pub fn xi_json(m: &ExplicitMdp, p: &Partition, x: &ArmdpWeights) -> Value {
    let entries: Vec<Value> = x
        .iter()
        .map(|((c, a), dist)| {
            let d: Map<String, Value> =
                dist.iter().map(|(s, q)| (m.states[*s].id.clone(), Value::String(format_rational(q)))).collect();
            json!({"sbar": p.name(*c), "action": m.actions[*a].name, "weights": d})
        })
        .collect();
    Value::Array(entries)
}

/// Feasibility verdict; the witness lists every conflicting class with its
/// C-sets, constraints and an irreducible core.
pub fn check_wfa_feasibility(m: &ExplicitMdp, p: &Partition) -> (CheckReport, Option<WfaWeights>) {
    const NAME: &str = "wfa_feasibility";
    match wfa_feasibility(&compute_csets(m, p), p) {
        WfaFeasibility::Feasible(w) => {
            let r = CheckReport::pass(NAME, WFA_FEASIBLE).with_details(json!({"weights": weights_json(m, p, &w)}));
            (r, Some(w))
        }
        WfaFeasibility::Infeasible { conflicts, .. } => {
            let witness = json!({"conflicts": conflicts.iter().map(|c| c.to_json(m, p)).collect::<Vec<_>>()});
            (CheckReport::fail(NAME, WFA_FEASIBLE, witness), None)
        }
    }
}

/// The framework's point model (for ABPMDP, `select_max`) together with the
/// reports that justified building it. `None` when a report failed first.
pub fn framework_model(m: &ExplicitMdp, p: &Partition, f: Framework) -> (Vec<CheckReport>, Option<AbstractMdp>) {
    match f {
        Framework::Wfa => {
            let (r, w) = check_wfa_feasibility(m, p);
            let am = w.map(|w| build_wfa(m, p, &w));
            (vec![r], am)
        }
        Framework::Armdp => match default_xi(m, &compute_csets(m, p), p) {
            Ok(xi) => {
                let r = CheckReport::pass("default_xi", XI_DEFINED)
                    .with_details(json!({"xi": xi_json(m, p, &xi.weights), "warnings": xi.warnings}));
                (vec![r], Some(build_armdp(m, p, &xi.weights)))
            }
            Err(AbstractionError::Ambiguous { sbar, action, detail }) => {
                let r = CheckReport::fail("default_xi", XI_DEFINED, json!({"sbar": sbar, "action": action, "csets": detail}));
                (vec![r], None)
            }
            Err(e) => unreachable!("default_xi only reports ambiguity: {e}"),
        },
        Framework::Abpmdp => match select_max(&build_abpmdp(m, p)) {
            Ok(am) => (vec![CheckReport::pass("select_max", REPRESENTABLE)], Some(am)),
            Err(AbstractionError::NonRepresentable { sbar, action, sum }) => {
                let r = CheckReport::fail("select_max", REPRESENTABLE, json!({"sbar": sbar, "action": action, "sum": sum}));
                (vec![r], None)
            }
            Err(e) => unreachable!("select_max on an interval model: {e}"),
        },
    }
}

/// `check wfa|armdp|abpmdp`: construction, connection preservation, and
/// determinism when the source is deterministic.
pub fn check_framework(m: &ExplicitMdp, p: &Partition, f: Framework) -> Vec<CheckReport> {
    if f == Framework::Abpmdp {
        let abp = build_abpmdp(m, p);
        let mut out = vec![check_connection_preserving(m, p, &abp)];
        out.extend(framework_model(m, p, f).0);
        return out;
    }
    let (mut out, am) = framework_model(m, p, f);
    if let Some(am) = am {
        out.push(check_connection_preserving(m, p, &am));
        if m.is_deterministic() {
            out.push(check_deterministic(&am).expect("point model"));
        }
    }
    out
}

/// `check equiv`: the framework's point model against the projected task.
/// `p` must number its classes like `planning` (`Partition::from_projection`).
pub fn check_framework_equivalence(planning: &ExplicitMdp, m: &ExplicitMdp, p: &Partition, f: Framework) -> Vec<CheckReport> {
    let (mut out, am) = framework_model(m, p, f);
    if let Some(am) = am {
        out.push(check_equivalence(planning, &am).expect("point model"));
    }
    out
}

/// Representative independence and absence of ambiguity.
pub fn check_partition_properties(m: &ExplicitMdp, p: &Partition) -> Vec<CheckReport> {
    vec![check_representative_independence(m, p), check_no_ambiguity(m, p)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{self, PACKAGE_PATTERN};
    use crate::projection::{abstract_graph, project_task, Pattern};
    use crate::statespace::{default_gamma, expand, load_graph};

    fn logistics() -> (ExplicitMdp, Partition, ExplicitMdp) {
        let t = instances::logistics().unwrap();
        let m = expand(&t, &default_gamma()).unwrap();
        let p = Pattern::from_names(&PACKAGE_PATTERN, &t.facts).unwrap();
        let g = abstract_graph(&project_task(&t, &p), &default_gamma()).unwrap();
        let part = Partition::from_projection(&m, &p, &g).unwrap();
        (m, part, g)
    }

    #[test]
    fn logistics_bundles() {
        let (m, p, g) = logistics();
        let passed = |rs: &[CheckReport]| rs.iter().all(CheckReport::passed);
        assert!(passed(&check_framework(&m, &p, Framework::Armdp)));
        assert!(passed(&check_framework(&m, &p, Framework::Abpmdp)));
        assert!(!passed(&check_framework(&m, &p, Framework::Wfa)));
        let eq = check_framework_equivalence(&g, &m, &p, Framework::Armdp);
        assert_eq!(eq.iter().map(|r| r.check.as_str()).collect::<Vec<_>>(), ["default_xi", "equivalence"]);
        assert!(passed(&eq));
        assert!(passed(&check_framework_equivalence(&g, &m, &p, Framework::Abpmdp)));
        assert!(passed(&check_partition_properties(&m, &p)));
    }

    #[test]
    fn counterexample_witness() {
        let m = load_graph(instances::COUNTEREXAMPLE_GRAPH).unwrap();
        let p = Partition::by_pattern(&m, &Pattern::from_names(&["p1", "p2"], m.facts.as_ref().unwrap()).unwrap()).unwrap();
        let (r, w) = check_wfa_feasibility(&m, &p);
        assert!(w.is_none());
        let c = &r.witness.unwrap()["conflicts"][0];
        assert_eq!(c["sbar"], "s\u{304}1");
        assert_eq!(c["constraints"], json!(["ω(s6)+ω(s8)=1", "ω(s6)=1", "ω(s8)=1"]));
        assert_eq!("armdp".parse::<Framework>(), Ok(Framework::Armdp));
        assert!("lp".parse::<Framework>().is_err());
    }
}
