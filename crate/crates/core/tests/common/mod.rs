//! Independent oracles shared by the property suites and the acceptance
//! harness. None of them call the library routine they are checking.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use num_traits::{One, Zero};
use projabs::abstraction::{AbstractMdp, CSetIndex, Partition, WfaFeasibility};
use projabs::corpus;
use projabs::rational::{ratio, to_f64, Prob};
use projabs::statespace::{ExplicitMdp, Row};
use projabs::task::{PlanningTask, State};

pub type Check = Result<(), String>;

/// Optimal cost-to-goal of every reachable state by Dijkstra over explicit
/// successors, written out from scratch.
pub fn distances(t: &PlanningTask) -> HashMap<State, Option<u64>> {
    let mut states = vec![t.init.clone()];
    let mut index: HashMap<State, usize> = HashMap::from([(t.init.clone(), 0)]);
    let mut preds: Vec<Vec<(usize, u64)>> = vec![Vec::new()];
    let mut i = 0;
    while i < states.len() {
        let s = states[i].clone();
        for a in &t.actions {
            if !a.pre.iter().all(|&p| s.get(p)) {
                continue;
            }
            let mut n = s.clone();
            for &d in &a.outcomes[0].del {
                n.set(d, false);
            }
            for &f in &a.outcomes[0].add {
                n.set(f, true);
            }
            let j = *index.entry(n.clone()).or_insert_with(|| {
                states.push(n);
                preds.push(Vec::new());
                states.len() - 1
            });
            preds[j].push((i, u64::from(a.cost)));
        }
        i += 1;
    }
    let mut dist: Vec<Option<u64>> = vec![None; states.len()];
    let mut heap = BinaryHeap::new();
    for (k, s) in states.iter().enumerate() {
        if t.goal.iter().all(|&g| s.get(g)) {
            dist[k] = Some(0);
            heap.push(Reverse((0u64, k)));
        }
    }
    while let Some(Reverse((d, k))) = heap.pop() {
        if dist[k] != Some(d) {
            continue;
        }
        for &(p, c) in &preds[k] {
            if dist[p].is_none_or(|old| d + c < old) {
                dist[p] = Some(d + c);
                heap.push(Reverse((d + c, p)));
            }
        }
    }
    states.into_iter().zip(dist).collect()
}

fn mass_of(row: Option<&Row>, t: usize) -> Prob {
    row.and_then(|r| r.successors.iter().find(|(x, _)| *x == t)).map_or_else(Prob::zero, |(_, q)| q.clone())
}

/// Every point row lies inside the interval row of the same pair.
pub fn inside_intervals(point: &AbstractMdp, interval: &AbstractMdp) -> Check {
    let prows = point.point_rows().ok_or("not point valued")?;
    for (s, rows) in prows.iter().enumerate() {
        for r in rows {
            let name = &point.actions[r.action].name;
            let ir = interval.interval_row(s, r.action).ok_or_else(|| format!("({s}, {name}) has no interval row"))?;
            let targets: BTreeSet<usize> =
                r.successors.iter().map(|(t, _)| *t).chain(ir.successors.iter().map(|(t, _, _)| *t)).collect();
            for t in targets {
                let q = mass_of(Some(r), t);
                let (lo, hi) = ir
                    .successors
                    .iter()
                    .find(|(x, _, _)| *x == t)
                    .map_or_else(|| (Prob::zero(), Prob::zero()), |(_, lo, hi)| (lo.clone(), hi.clone()));
                if q < lo || q > hi {
                    return Err(format!("({s}, {name}, {t}): {q} outside [{lo}, {hi}]"));
                }
            }
            if r.reward < ir.reward.0 || r.reward > ir.reward.1 {
                return Err(format!("({s}, {name}) reward {} outside [{}, {}]", r.reward, ir.reward.0, ir.reward.1));
            }
        }
    }
    Ok(())
}

/// All distributions over `n` slots whose weights are multiples of `1/d`
/// for some `d <= max_den`.
pub fn candidate_distributions(n: usize, max_den: usize) -> Vec<Vec<Prob>> {
    fn compositions(total: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=total {
            cur.push(k);
            compositions(total - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut seen = BTreeSet::new();
    for d in 1..=max_den.max(1) {
        let mut out = Vec::new();
        compositions(d, n, &mut Vec::new(), &mut out);
        for c in out {
            seen.insert(c.into_iter().map(|k| ratio(k as i64, d as i64)).collect::<Vec<_>>());
        }
    }
    seen.into_iter().collect()
}

/// Brute force: for each class, does some candidate ω give every abstract
/// transition leaving the class probability exactly 1?
pub fn wfa_oracle(m: &ExplicitMdp, p: &Partition) -> Vec<bool> {
    (0..p.num_classes())
        .map(|c| {
            let members = p.members(c);
            let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
            for &s in members {
                for r in &m.rows[s] {
                    for (t, q) in &r.successors {
                        if p.class_of(*t) != c && *q > Prob::zero() {
                            pairs.insert((r.action, p.class_of(*t)));
                        }
                    }
                }
            }
            candidate_distributions(members.len(), members.len()).iter().any(|w| {
                pairs.iter().all(|&(a, t)| {
                    let total: Prob = members
                        .iter()
                        .zip(w)
                        .filter_map(|(&s, ws)| m.row(s, a).map(|r| ws * corpus::mass_into(r, p, t)))
                        .sum();
                    total.is_one()
                })
            })
        })
        .collect()
}

/// The intersection verdict against the brute force, class by class, plus a
/// replay of the returned weights when feasible.
pub fn wfa_agreement(m: &ExplicitMdp, p: &Partition, verdict: &WfaFeasibility) -> Check {
    let oracle = wfa_oracle(m, p);
    let lib: Vec<bool> = match verdict {
        WfaFeasibility::Feasible(_) => vec![true; p.num_classes()],
        WfaFeasibility::Infeasible { conflicts, .. } => {
            let bad: BTreeSet<usize> = conflicts.iter().map(|c| c.class).collect();
            (0..p.num_classes()).map(|c| !bad.contains(&c)).collect()
        }
    };
    if lib != oracle {
        return Err(format!("intersection {lib:?} vs brute force {oracle:?}"));
    }
    if let WfaFeasibility::Feasible(w) = verdict {
        for c in 0..p.num_classes() {
            let total: Prob = w[c].values().sum();
            if !total.is_one() || w[c].keys().any(|s| p.class_of(*s) != c) {
                return Err(format!("weights of class {c} are not a distribution over it"));
            }
        }
    }
    Ok(())
}

/// Re-derives C-set membership from the definition.
pub fn csets_match_definition(m: &ExplicitMdp, p: &Partition, cs: &CSetIndex) -> Check {
    let mut want: BTreeMap<(usize, usize, usize), Vec<usize>> = BTreeMap::new();
    for s in 0..m.num_states() {
        let c = p.class_of(s);
        for r in &m.rows[s] {
            for t in 0..p.num_classes() {
                if t != c && corpus::mass_into(r, p, t) > Prob::zero() {
                    want.entry((c, r.action, t)).or_default().push(s);
                }
            }
        }
    }
    if want != cs.sets {
        return Err(format!("C-sets {:?} vs definition {:?}", cs.sets, want));
    }
    Ok(())
}

/// One vertex of a row's selection polytope: targets (plus the zero-value
/// sink, key `None`) filled to their upper bounds in `order`.
fn greedy_vertex(entries: &[(Option<usize>, Prob, Prob)], order: &[usize]) -> Vec<(Option<usize>, Prob)> {
    let mut x: Vec<Prob> = entries.iter().map(|e| e.1.clone()).collect();
    let mut remaining = Prob::one() - x.iter().sum::<Prob>();
    for &i in order {
        let room = &entries[i].2 - &entries[i].1;
        let extra = if room < remaining { room } else { remaining.clone() };
        x[i] += &extra;
        remaining -= extra;
    }
    entries.iter().zip(x).filter(|(_, q)| !q.is_zero()).map(|(e, q)| (e.0, q)).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

type Selection = (Vec<(Option<usize>, Prob)>, Prob);

/// Vertex selections of every interval row, rewards at either bound.
pub fn row_selections(am: &AbstractMdp, absorb_goals: bool) -> Vec<Vec<Vec<Selection>>> {
    let rows = am.interval_rows().expect("interval valued");
    rows.iter()
        .enumerate()
        .map(|(s, rs)| {
            if absorb_goals && am.states[s].goal {
                return Vec::new();
            }
            rs.iter()
                .map(|r| {
                    let lo_sum: Prob = r.successors.iter().map(|e| &e.1).sum();
                    let hi_sum: Prob = r.successors.iter().map(|e| &e.2).sum();
                    let mut entries: Vec<(Option<usize>, Prob, Prob)> =
                        r.successors.iter().map(|(t, lo, hi)| (Some(*t), lo.clone(), hi.clone())).collect();
                    let sink_lo = if hi_sum > Prob::one() { Prob::zero() } else { Prob::one() - hi_sum };
                    entries.push((None, sink_lo, Prob::one() - lo_sum));
                    let mut out: BTreeSet<(Vec<(Option<usize>, Prob)>, Prob)> = BTreeSet::new();
                    for order in permutations(entries.len()) {
                        let v = greedy_vertex(&entries, &order);
                        out.insert((v.clone(), r.reward.0.clone()));
                        out.insert((v, r.reward.1.clone()));
                    }
                    out.into_iter().collect()
                })
                .collect()
        })
        .collect()
}

/// Optimal values of one point selection, sink at value 0.
fn point_values(n: usize, rows: &[Vec<&Selection>], gamma: f64) -> Vec<f64> {
    let rows: Vec<Vec<(Vec<(Option<usize>, f64)>, f64)>> = rows
        .iter()
        .map(|rs| rs.iter().map(|(succ, r)| (succ.iter().map(|(t, q)| (*t, to_f64(q))).collect(), to_f64(r))).collect())
        .collect();
    let mut v = vec![0.0; n];
    loop {
        let next: Vec<f64> = (0..n)
            .map(|s| {
                rows[s]
                    .iter()
                    .map(|(succ, r)| r + gamma * succ.iter().map(|(t, q)| t.map_or(0.0, |t| q * v[t])).sum::<f64>())
                    .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
                    .unwrap_or(0.0)
            })
            .collect();
        let r = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if r < 1e-14 {
            return v;
        }
    }
}

/// Size of the product of all rows' vertex sets.
pub fn selection_count(sel: &[Vec<Vec<Selection>>]) -> u128 {
    sel.iter().flatten().map(|opts| opts.len() as u128).product()
}

/// Solves every combination of per-row vertices and checks it against the
/// bounds. Returns the number of point MDPs checked.
pub fn sandwich(am: &AbstractMdp, lower: &[f64], upper: &[f64], absorb_goals: bool, tol: f64) -> Result<usize, String> {
    let sel = row_selections(am, absorb_goals);
    let n = am.num_states();
    let gamma = to_f64(&am.gamma);
    let flat: Vec<(usize, &Vec<Selection>)> =
        sel.iter().enumerate().flat_map(|(s, rs)| rs.iter().map(move |opts| (s, opts))).collect();
    let mut pick = vec![0usize; flat.len()];
    let mut checked = 0;
    loop {
        let mut rows: Vec<Vec<&Selection>> = vec![Vec::new(); n];
        for (k, (s, opts)) in flat.iter().enumerate() {
            rows[*s].push(&opts[pick[k]]);
        }
        let v = point_values(n, &rows, gamma);
        for s in 0..n {
            if v[s] < lower[s] - tol || v[s] > upper[s] + tol {
                return Err(format!("state {s}: {} outside [{}, {}] under selection {pick:?}", v[s], lower[s], upper[s]));
            }
        }
        checked += 1;
        let mut k = 0;
        loop {
            if k == flat.len() {
                return Ok(checked);
            }
            pick[k] += 1;
            if pick[k] < flat[k].1.len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}
