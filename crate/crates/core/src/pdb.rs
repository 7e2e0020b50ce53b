//! Pattern databases.
//!
//! A database stores the optimal goal distance of every abstract state of a
//! projected classical task. States are encoded LSB-first over the pattern:
//! bit `i` of the code is the `i`-th pattern fact.
//!
//! File format (plain text, one record per line):
//!
//! ```text
//! pdb 1
//! task <sha256 fingerprint of the task>
//! pattern <fact name>;<fact name>;...
//! entries <n>
//! <code>: <distance>        (distance is an integer or `inf`)
//! ```
//!
//! Codes are listed in increasing order; codes missing from the listing are
//! unreachable abstract states.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::par::{self, Execution};
use crate::projection::{project_state, project_task, Pattern, PatternError};
use crate::rational::format_rational;
use crate::solvers::Distance;
use crate::task::{self, PlanningTask, State};

/// Patterns up to this size get a dense table over all `2^k` abstract states.
pub const DENSE_LIMIT: usize = 24;
const INF: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PdbError {
    #[error("pattern databases need a classical task; `{0}` has several outcomes")]
    NotClassical(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("database was built for task {found}, not {expected}")]
    Fingerprint { expected: String, found: String },
    #[error("databases disagree on the task")]
    MixedTasks,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Table {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDatabase {
    pub pattern: Pattern,
    pub names: Vec<String>,
    pub fingerprint: String,
    table: Table,
}

/// Hash of the task's facts, actions, initial state and goal.
pub fn fingerprint(t: &PlanningTask) -> String {
    let mut h = Sha256::new();
    for n in t.facts.names() {
        h.update(n.as_bytes());
        h.update([0]);
    }
    h.update(b"|actions|");
    for a in &t.actions {
        h.update(a.name.as_bytes());
        h.update(format!("{:?}{}", a.pre, a.cost).as_bytes());
        for o in &a.outcomes {
            h.update(format!("{:?}{:?}{}", o.add, o.del, format_rational(&o.prob)).as_bytes());
        }
        h.update([0]);
    }
    h.update(t.init.to_string().as_bytes());
    h.update(format!("{:?}", t.goal).as_bytes());
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn check_classical(t: &PlanningTask) -> Result<(), PdbError> {
    match t.actions.iter().find(|a| !a.is_classical()) {
        Some(a) => Err(PdbError::NotClassical(a.name.clone())),
        None => Ok(()),
    }
}

/// Successor codes of abstract state `code` under every applicable action.
fn successors(at: &PlanningTask, code: u64) -> Vec<(u64, u32)> {
    let s = State::from_index(at.width(), code);
    at.actions
        .iter()
        .filter(|a| task::applicable(&s, a).expect("projected task"))
        .map(|a| (task::apply(&s, a, &a.outcomes[0]).expect("applicable").to_index(), a.cost))
        .filter(|&(t, _)| t != code)
        .collect()
}

fn dijkstra(preds: &HashMap<u64, Vec<(u64, u32)>>, goals: impl Iterator<Item = u64>) -> HashMap<u64, u32> {
    let mut dist: HashMap<u64, u32> = HashMap::new();
    let mut heap = std::collections::BinaryHeap::new();
    for g in goals {
        dist.insert(g, 0);
        heap.push(std::cmp::Reverse((0u32, g)));
    }
    while let Some(std::cmp::Reverse((d, s))) = heap.pop() {
        if dist.get(&s).is_some_and(|&x| x < d) {
            continue;
        }
        for &(p, c) in preds.get(&s).map_or(&[][..], Vec::as_slice) {
            let nd = d.saturating_add(c);
            if dist.get(&p).is_none_or(|&x| nd < x) {
                dist.insert(p, nd);
                heap.push(std::cmp::Reverse((nd, p)));
            }
        }
    }
    dist
}

pub fn build_pdb(t: &PlanningTask, p: &Pattern) -> Result<PatternDatabase, PdbError> {
    build_pdb_with(t, p, Execution::available())
}

/// Projects `t`, then runs backward Dijkstra over the abstract state space:
/// all `2^k` states for `k <= DENSE_LIMIT`, otherwise the states reachable
/// from the abstract initial state.
pub fn build_pdb_with(t: &PlanningTask, p: &Pattern, exec: Execution) -> Result<PatternDatabase, PdbError> {
    build(t, p, exec, DENSE_LIMIT)
}

fn build(t: &PlanningTask, p: &Pattern, exec: Execution, dense_limit: usize) -> Result<PatternDatabase, PdbError> {
    check_classical(t)?;
    let at = project_task(t, p);
    let k = p.len();
    let goal_mask: u64 = at.goal.iter().map(|&g| 1u64 << g).sum();
    let is_goal = |c: u64| c & goal_mask == goal_mask;
    let mut preds: HashMap<u64, Vec<(u64, u32)>> = HashMap::new();
    let table = if k <= dense_limit {
        let n = 1u64 << k;
        let succ = par::map_range(exec, n as usize, |c| successors(&at, c as u64));
        for (c, out) in succ.into_iter().enumerate() {
            for (t, cost) in out {
                preds.entry(t).or_default().push((c as u64, cost));
            }
        }
        let dist = dijkstra(&preds, (0..n).filter(|&c| is_goal(c)));
        let mut dense = vec![INF; n as usize];
        for (c, d) in dist {
            dense[c as usize] = d;
        }
        Table::Dense(dense)
    } else {
        let start = at.init.to_index();
        let mut seen = vec![start];
        let mut known: HashMap<u64, ()> = HashMap::from([(start, ())]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for (t, cost) in successors(&at, c) {
                preds.entry(t).or_default().push((c, cost));
                if known.insert(t, ()).is_none() {
                    seen.push(t);
                    queue.push_back(t);
                }
            }
        }
        let dist = dijkstra(&preds, seen.iter().copied().filter(|&c| is_goal(c)));
        Table::Sparse(seen.into_iter().map(|c| (c, dist.get(&c).copied().unwrap_or(INF))).collect())
    };
    Ok(PatternDatabase { names: p.names(&t.facts), pattern: p.clone(), fingerprint: fingerprint(t), table })
}

/// Builds one database per pattern, concurrently when available.
pub fn build_pdbs(t: &PlanningTask, patterns: &[Pattern], exec: Execution) -> Result<Vec<PatternDatabase>, PdbError> {
    par::map(exec, patterns, |p| build_pdb_with(t, p, Execution::Sequential)).into_iter().collect()
}

impl PatternDatabase {
    /// Distance stored for an abstract-state code.
    pub fn get(&self, code: u64) -> Distance {
        let d = match &self.table {
            Table::Dense(v) => v.get(code as usize).copied().unwrap_or(INF),
            Table::Sparse(m) => m.get(&code).copied().unwrap_or(INF),
        };
        (d != INF).then_some(u64::from(d))
    }

    pub fn lookup(&self, s: &State) -> Distance {
        self.get(project_state(s, &self.pattern).to_index())
    }

    /// `(code, distance)` for every stored abstract state, in code order.
    pub fn entries(&self) -> Vec<(u64, Distance)> {
        let mut out: Vec<(u64, Distance)> = match &self.table {
            Table::Dense(v) => (0..v.len() as u64).map(|c| (c, self.get(c))).collect(),
            Table::Sparse(m) => m.keys().map(|&c| (c, self.get(c))).collect(),
        };
        out.sort_by_key(|e| e.0);
        out
    }

    pub fn to_text(&self) -> String {
        let entries = self.entries();
        let mut out = format!("pdb 1\ntask {}\npattern {}\nentries {}\n", self.fingerprint, self.names.join(";"), entries.len());
        for (c, d) in entries {
            match d {
                Some(d) => writeln!(out, "{c}: {d}"),
                None => writeln!(out, "{c}: inf"),
            }
            .expect("string write");
        }
        out
    }

    /// Reads a database back; `t` must be the task it was built for.
    pub fn from_text(text: &str, t: &PlanningTask) -> Result<Self, PdbError> {
        let err = |line: usize, msg: &str| PdbError::Format { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let mut header = |key: &str| -> Result<(usize, String), PdbError> {
            let (n, l) = lines.next().ok_or_else(|| err(0, &format!("missing `{key}` line")))?;
            let rest = l.strip_prefix(key).ok_or_else(|| err(n, &format!("expected `{key}`")))?;
            Ok((n, rest.trim().to_string()))
        };
        let (n, version) = header("pdb")?;
        if version != "1" {
            return Err(err(n, "unsupported version"));
        }
        let (_, fp) = header("task")?;
        let expected = fingerprint(t);
        if fp != expected {
            return Err(PdbError::Fingerprint { expected, found: fp });
        }
        let (_, pat) = header("pattern")?;
        let names: Vec<&str> = if pat.is_empty() { Vec::new() } else { pat.split(';').collect() };
        let pattern = Pattern::from_names(&names, &t.facts)?;
        let (n, count) = header("entries")?;
        let count: usize = count.parse().map_err(|_| err(n, "bad entry count"))?;
        let mut map: BTreeMap<u64, u32> = BTreeMap::new();
        for (n, l) in lines {
            let (c, d) = l.split_once(':').ok_or_else(|| err(n, "expected `code: distance`"))?;
            let c: u64 = c.trim().parse().map_err(|_| err(n, "bad code"))?;
            let d = match d.trim() {
                "inf" => INF,
                x => x.parse::<u32>().ok().filter(|&v| v != INF).ok_or_else(|| err(n, "bad distance"))?,
            };
            if map.insert(c, d).is_some() {
                return Err(err(n, "duplicate code"));
            }
        }
        if map.len() != count {
            return Err(err(0, &format!("expected {count} entries, found {}", map.len())));
        }
        let k = pattern.len();
        let table = if k <= DENSE_LIMIT && map.len() == 1usize << k {
            Table::Dense(map.into_values().collect())
        } else {
            Table::Sparse(map.into_iter().collect())
        };
        Ok(PatternDatabase { names: names.iter().map(|s| s.to_string()).collect(), pattern, fingerprint: fp, table })
    }
}

/// `h(s) = max` over the databases (0 for none).
pub fn max_combine(dbs: &[PatternDatabase]) -> Result<impl Fn(&State) -> Distance + '_, PdbError> {
    same_task(dbs)?;
    Ok(move |s: &State| {
        let mut best = 0;
        for db in dbs {
            best = best.max(db.lookup(s)?);
        }
        Some(best)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditivityViolation {
    pub action: String,
    pub patterns: (usize, usize),
}

/// `h(s) = sum` over the databases, accepted only when no action changes
/// facts of two different patterns.
pub fn additive_combine<'a>(
    t: &PlanningTask,
    dbs: &'a [PatternDatabase],
) -> Result<Result<impl Fn(&State) -> Distance + 'a, AdditivityViolation>, PdbError> {
    same_task(dbs)?;
    if let Some(v) = additivity_violation(t, dbs) {
        return Ok(Err(v));
    }
    Ok(Ok(move |s: &State| {
        let mut total = 0;
        for db in dbs {
            total += db.lookup(s)?;
        }
        Some(total)
    }))
}

/// First action whose net effect touches two of the patterns.
pub fn additivity_violation(t: &PlanningTask, dbs: &[PatternDatabase]) -> Option<AdditivityViolation> {
    for a in &t.actions {
        let touched: Vec<usize> = dbs
            .iter()
            .enumerate()
            .filter(|(_, db)| {
                a.outcomes.iter().any(|o| {
                    let d = task::effect_delta(o, t.width());
                    db.pattern.facts().iter().any(|&f| d[f] != 0)
                })
            })
            .map(|(i, _)| i)
            .collect();
        if touched.len() >= 2 {
            return Some(AdditivityViolation { action: a.name.clone(), patterns: (touched[0], touched[1]) });
        }
    }
    None
}

fn same_task(dbs: &[PatternDatabase]) -> Result<(), PdbError> {
    match dbs.first() {
        Some(first) if dbs.iter().any(|d| d.fingerprint != first.fingerprint) => Err(PdbError::MixedTasks),
        _ => Ok(()),
    }
}
