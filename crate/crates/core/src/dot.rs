//! Graphviz export of explicit and abstract MDPs.
//!
//! Concrete graphs can be grouped by a partition, each class drawn as a
//! dashed cluster. Edge labels read `action:prob`, or `action:[lo,hi]` for
//! interval models. Goal states get a double border.

use std::fmt::Write;

use crate::abstraction::{AbstractMdp, Partition, Transitions};
use crate::rational::format_rational;
use crate::statespace::{ExplicitMdp, StateInfo};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn node(out: &mut String, indent: &str, i: usize, s: &StateInfo, init: bool) {
    let mut attrs = vec![format!("label={}", quote(&s.id))];
    if s.goal {
        attrs.push("peripheries=2".into());
    }
    if init {
        attrs.push("style=bold".into());
    }
    writeln!(out, "{indent}n{i} [{}];", attrs.join(", ")).unwrap();
}

/// Edges between distinct states only; self-loop mass is left out of the
/// picture.
pub fn graph_dot(m: &ExplicitMdp, classes: Option<&Partition>) -> String {
    let mut out = String::from("digraph mdp {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    match classes {
        Some(p) => {
            for c in 0..p.num_classes() {
                writeln!(out, "  subgraph cluster_{c} {{").unwrap();
                writeln!(out, "    style=dashed;").unwrap();
                writeln!(out, "    label={};", quote(&format!("{} {}", p.name(c), p.label(c)))).unwrap();
                for &s in p.members(c) {
                    node(&mut out, "    ", s, &m.states[s], s == m.init);
                }
                out.push_str("  }\n");
            }
        }
        None => {
            for (i, s) in m.states.iter().enumerate() {
                node(&mut out, "  ", i, s, i == m.init);
            }
        }
    }
    for (s, rows) in m.rows.iter().enumerate() {
        for r in rows {
            for (t, q) in &r.successors {
                if *t != s {
                    let label = format!("{}:{}", m.actions[r.action].name, format_rational(q));
                    writeln!(out, "  n{s} -> n{t} [label={}];", quote(&label)).unwrap();
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Every entry with positive (upper) mass, self-loops included.
pub fn abstract_dot(am: &AbstractMdp) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=LR;\n  node [shape=box, style=dashed];\n", quote(am.provenance.as_str()));
    for (i, s) in am.states.iter().enumerate() {
        let mut attrs = vec![format!("label={}", quote(&format!("{}\\n{}", s.id, s.label)))];
        if s.goal {
            attrs.push("peripheries=2".into());
        }
        if i == am.init {
            attrs.push("style=\"dashed,bold\"".into());
        }
        writeln!(out, "  n{i} [{}];", attrs.join(", ")).unwrap();
    }
    let mut edge = |s: usize, t: usize, label: String| {
        writeln!(out, "  n{s} -> n{t} [label={}];", quote(&label)).unwrap();
    };
    match &am.transitions {
        Transitions::Point(rows) => {
            for (s, rs) in rows.iter().enumerate() {
                for r in rs {
                    for (t, q) in &r.successors {
                        edge(s, *t, format!("{}:{}", am.actions[r.action].name, format_rational(q)));
                    }
                }
            }
        }
        Transitions::Interval(rows) => {
            for (s, rs) in rows.iter().enumerate() {
                for r in rs {
                    for (t, lo, hi) in &r.successors {
                        let label = format!("{}:[{},{}]", am.actions[r.action].name, format_rational(lo), format_rational(hi));
                        edge(s, *t, label);
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
