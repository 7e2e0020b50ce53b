use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use projabs::abstraction::{
    build_abpmdp, check_framework, check_framework_equivalence, check_partition_properties, framework_model,
    AbstractMdp, Framework, Partition,
};
use projabs::dot::{abstract_dot, graph_dot};
use projabs::pdb::{build_pdb, PatternDatabase};
use projabs::pddl::{self, Grounding, DEFAULT_FACT_CAP};
use projabs::projection::{abstract_graph, check_linearity, project_task, Pattern, Sampling};
use projabs::rational::{format_rational, is_probability, one, parse_rational, Prob};
use projabs::report::CheckReport;
use projabs::solvers::json::{interval_json, search_json, values_json};
use projabs::solvers::{astar_search, interval_value_iteration, value_iteration, FloatModel, IntervalModel, ViOptions};
use projabs::statespace::{default_gamma, expand_with_cap, load_graph, to_graph_json, ExplicitMdp, DEFAULT_STATE_CAP};
use projabs::task::{split_fact_list, FactTable, PlanningTask, State};

use crate::args::{CheckKind, Cli, Command, Format, InputArgs, PdbCommand, Solver};

/// Exhaustive linearity checks stop at this many facts; wider tasks are sampled.
const EXHAUSTIVE_WIDTH: usize = 20;
const LINEARITY_SAMPLES: usize = 4096;

/// Produced output and whether every check in it passed.
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, passed: true }
    }
}

enum Input {
    Task(Box<Grounding>),
    Graph(Box<ExplicitMdp>),
}

struct Session {
    input: Input,
    gamma: Prob,
    cap: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

impl Session {
    fn open(a: &InputArgs) -> Result<Self> {
        let gamma = match &a.gamma {
            Some(g) => {
                let g = parse_rational(g).map_err(|e| anyhow::anyhow!("--gamma: {e}"))?;
                if !is_probability(&g) || g == one() {
                    bail!("--gamma must lie in [0, 1), got {}", format_rational(&g));
                }
                Some(g)
            }
            None => None,
        };
        if !(a.epsilon > 0.0 && a.epsilon.is_finite()) {
            bail!("--epsilon must be positive");
        }
        let input = match (&a.domain, &a.problem, &a.graph) {
            (Some(d), Some(p), None) => {
                let domain = pddl::parse_domain(&read(d)?).with_context(|| format!("{}", d.display()))?;
                let universe = pddl::parse_problem(&read(p)?, &domain).with_context(|| format!("{}", p.display()))?;
                Input::Task(Box::new(pddl::ground_with_cap(&domain, &universe, DEFAULT_FACT_CAP)?))
            }
            (None, None, Some(g)) => {
                let mut m = load_graph(&read(g)?).with_context(|| format!("{}", g.display()))?;
                if let Some(gamma) = &gamma {
                    m.gamma = gamma.clone();
                }
                Input::Graph(Box::new(m))
            }
            _ => bail!("give either --domain and --problem, or --graph"),
        };
        let gamma = gamma.unwrap_or_else(default_gamma);
        Ok(Session { input, gamma, cap: a.state_cap.unwrap_or(DEFAULT_STATE_CAP) })
    }

    fn task(&self, what: &str) -> Result<&PlanningTask> {
        match &self.input {
            Input::Task(g) => Ok(&g.task),
            Input::Graph(_) => bail!("{what} needs a PDDL task (--domain and --problem)"),
        }
    }

    fn mdp(&self) -> Result<ExplicitMdp> {
        match &self.input {
            Input::Task(g) => Ok(expand_with_cap(&g.task, &self.gamma, self.cap)?),
            Input::Graph(m) => Ok(m.as_ref().clone()),
        }
    }

    fn facts<'a>(&'a self, m: &'a ExplicitMdp) -> Result<&'a FactTable> {
        match &self.input {
            Input::Task(g) => Ok(&g.task.facts),
            Input::Graph(_) => m.facts.as_ref().context("the graph names no facts, so it cannot be projected"),
        }
    }
}

/// Partition of the concrete model by a pattern. For PDDL input the classes
/// are numbered like the projected task's states, whose graph comes along.
struct Projected {
    pattern: Pattern,
    names: Vec<String>,
    partition: Partition,
    planning: Option<ExplicitMdp>,
}

fn project(s: &Session, m: &ExplicitMdp, text: &str) -> Result<Projected> {
    let facts = s.facts(m)?;
    let pattern = Pattern::parse(text, facts)?;
    let names = pattern.names(facts);
    let (partition, planning) = match &s.input {
        Input::Task(g) => {
            let ag = abstract_graph(&project_task(&g.task, &pattern), &s.gamma)?;
            (Partition::from_projection(m, &pattern, &ag)?, Some(ag))
        }
        Input::Graph(_) => (Partition::by_pattern(m, &pattern)?, None),
    };
    Ok(Projected { pattern, names, partition, planning })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn parse_graph_json(text: &str) -> Value {
    serde_json::from_str(text).expect("graph writer emits json")
}

fn no_dot(what: &str) -> Result<Outcome> {
    bail!("{what} has no DOT output; use --format json or text")
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let s = Session::open(&cli.input)?;
    let format = cli.output.format;
    let opts = ViOptions { epsilon: cli.input.epsilon, absorb_goals: !cli.input.no_absorb_goals, ..ViOptions::default() };
    match &cli.command {
        Command::Ground => ground(&s, format),
        Command::Expand => {
            let m = s.mdp()?;
            Ok(Outcome::ok(match format {
                Format::Json => to_graph_json(&m),
                Format::Dot => graph_dot(&m, None),
                Format::Text => summary(&m),
            }))
        }
        Command::Abstract { pattern } => abstraction(&s, pattern, format),
        Command::Check { kind, pattern, framework } => check(&s, *kind, pattern, *framework, format),
        Command::Pdb { action } => pdb(&s, action, format),
        Command::Solve { solver, pattern, framework, pdb } => {
            solve(&s, *solver, pattern.as_deref(), *framework, pdb.as_deref(), &opts, format)
        }
    }
}

fn names(facts: &FactTable, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| facts.name(i).to_string()).collect()
}

fn true_facts(facts: &FactTable, st: &State) -> Vec<String> {
    st.ones().map(|i| facts.name(i).to_string()).collect()
}

fn ground(s: &Session, format: Format) -> Result<Outcome> {
    let Input::Task(g) = &s.input else { bail!("ground needs a PDDL task (--domain and --problem)") };
    let t = &g.task;
    let f = &t.facts;
    let flavor = serde_json::to_value(t.flavor).expect("flavor serializes");
    Ok(Outcome::ok(match format {
        Format::Json => {
            let actions: Vec<Value> = t
                .actions
                .iter()
                .map(|a| {
                    let outcomes: Vec<Value> = a
                        .outcomes
                        .iter()
                        .map(|o| json!({"prob": format_rational(&o.prob), "add": names(f, &o.add), "del": names(f, &o.del)}))
                        .collect();
                    json!({"name": a.name, "cost": a.cost, "pre": names(f, &a.pre), "outcomes": outcomes})
                })
                .collect();
            pretty(&json!({
                "facts": f.names(),
                "init": true_facts(f, &t.init),
                "goal": names(f, &t.goal),
                "flavor": flavor,
                "actions": actions,
                "pruned": g.pruned.iter().map(|p| p.name()).collect::<Vec<_>>(),
            }))
        }
        Format::Text => format!(
            "flavor {}\nfacts {}\nactions {}\npruned {}\ninit {}\ngoal {}\n",
            flavor.as_str().unwrap_or_default(),
            f.len(),
            t.actions.len(),
            g.pruned.len(),
            true_facts(f, &t.init).join(", "),
            names(f, &t.goal).join(", "),
        ),
        Format::Dot => return no_dot("ground"),
    }))
}

fn summary(m: &ExplicitMdp) -> String {
    format!(
        "states {}\nactions {}\nrows {}\ngoal states {}\ndeterministic {}\ngamma {}\n",
        m.num_states(),
        m.actions.len(),
        m.num_rows(),
        m.goal_states().len(),
        m.is_deterministic(),
        format_rational(&m.gamma),
    )
}

fn abstraction(s: &Session, pattern: &str, format: Format) -> Result<Outcome> {
    let m = s.mdp()?;
    let pr = project(s, &m, pattern)?;
    let p = &pr.partition;
    Ok(Outcome::ok(match format {
        Format::Dot => graph_dot(&m, Some(p)),
        Format::Json => {
            let classes: Vec<Value> = (0..p.num_classes())
                .map(|c| {
                    let members: Vec<&str> = p.members(c).iter().map(|&i| m.states[i].id.as_str()).collect();
                    json!({"sbar": p.name(c), "label": p.label(c), "goal": p.is_goal(c), "members": members})
                })
                .collect();
            let graph = pr.planning.as_ref().map(|g| parse_graph_json(&to_graph_json(g)));
            pretty(&json!({"pattern": pr.names, "classes": classes, "abstract_graph": graph}))
        }
        Format::Text => {
            let mut out = format!("pattern {}\n", pr.names.join(", "));
            for c in 0..p.num_classes() {
                let members: Vec<&str> = p.members(c).iter().map(|&i| m.states[i].id.as_str()).collect();
                let goal = if p.is_goal(c) { " goal" } else { "" };
                out.push_str(&format!("{} {}{}: {}\n", p.name(c), p.label(c), goal, members.join(" ")));
            }
            out
        }
    }))
}

fn reports(rs: &[CheckReport], format: Format) -> Result<Outcome> {
    let passed = rs.iter().all(CheckReport::passed);
    let body = match format {
        Format::Json => {
            let checks: Vec<Value> = rs.iter().map(|r| serde_json::to_value(r).expect("report serializes")).collect();
            pretty(&json!({"checks": checks}))
        }
        Format::Text => {
            let mut out = String::new();
            for r in rs {
                let verdict = if r.passed() { "PASS" } else { "FAIL" };
                out.push_str(&format!("{verdict} {}: {}\n", r.check, r.property));
                if let Some(w) = &r.witness {
                    out.push_str(&format!("  witness {w}\n"));
                }
            }
            out
        }
        Format::Dot => return no_dot("check"),
    };
    Ok(Outcome { body, passed })
}

fn check(s: &Session, kind: CheckKind, pattern: &str, framework: Framework, format: Format) -> Result<Outcome> {
    let m = s.mdp()?;
    let pr = project(s, &m, pattern)?;
    let p = &pr.partition;
    let rs = match kind {
        CheckKind::Wfa => check_framework(&m, p, Framework::Wfa),
        CheckKind::Armdp => check_framework(&m, p, Framework::Armdp),
        CheckKind::Abpmdp => check_framework(&m, p, Framework::Abpmdp),
        CheckKind::Props => {
            let mut rs = Vec::new();
            if let Input::Task(g) = &s.input {
                let sampling = if g.task.width() <= EXHAUSTIVE_WIDTH {
                    Sampling::AllStates
                } else {
                    Sampling::Random { samples: LINEARITY_SAMPLES, seed: 0 }
                };
                rs.push(check_linearity(&g.task, &pr.pattern, sampling)?.to_report());
            }
            rs.extend(check_partition_properties(&m, p));
            rs
        }
        CheckKind::Equiv => {
            let planning = pr.planning.as_ref().context("equiv needs a PDDL task (--domain and --problem)")?;
            check_framework_equivalence(planning, &m, p, framework)
        }
    };
    reports(&rs, format)
}

fn pdb(s: &Session, action: &PdbCommand, format: Format) -> Result<Outcome> {
    let t = s.task("pdb")?;
    match action {
        PdbCommand::Build { pattern } => {
            let db = build_pdb(t, &Pattern::parse(pattern, &t.facts)?)?;
            match format {
                Format::Dot => no_dot("pdb build"),
                _ => Ok(Outcome::ok(db.to_text())),
            }
        }
        PdbCommand::Query { pdb, state } => {
            let db = PatternDatabase::from_text(&read(pdb)?, t).with_context(|| format!("{}", pdb.display()))?;
            let st = match state {
                Some(text) => t.state_from_names(&split_fact_list(text))?,
                None => t.init.clone(),
            };
            let code = projabs::projection::project_state(&st, &db.pattern).to_index();
            let d = db.get(code);
            Ok(Outcome::ok(match format {
                Format::Json => pretty(&json!({
                    "pattern": db.names,
                    "state": true_facts(&t.facts, &st),
                    "code": code,
                    "distance": d,
                })),
                Format::Text => match d {
                    Some(d) => format!("{d}\n"),
                    None => "inf\n".to_string(),
                },
                Format::Dot => return no_dot("pdb query"),
            }))
        }
    }
}

fn render_values(v: Value, format: Format, model: Option<&AbstractMdp>) -> Result<Outcome> {
    match format {
        Format::Json => Ok(Outcome::ok(pretty(&v))),
        Format::Dot => match model {
            Some(am) => Ok(Outcome::ok(abstract_dot(am))),
            None => no_dot("solve on a concrete model"),
        },
        Format::Text => {
            let mut out = String::new();
            for st in v["states"].as_array().into_iter().flatten() {
                let cells: Vec<String> = ["value", "lower", "upper", "action"]
                    .iter()
                    .filter_map(|k| st.get(*k).filter(|x| !x.is_null()))
                    .map(|x| x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string()))
                    .collect();
                out.push_str(&format!("{} {}\n", st["state"].as_str().unwrap_or_default(), cells.join(" ")));
            }
            Ok(Outcome::ok(out))
        }
    }
}

fn solve(
    s: &Session,
    solver: Solver,
    pattern: Option<&str>,
    framework: Option<Framework>,
    pdb: Option<&Path>,
    opts: &ViOptions,
    format: Format,
) -> Result<Outcome> {
    if solver != Solver::Astar && pdb.is_some() {
        bail!("--pdb only guides astar");
    }
    match solver {
        Solver::Vi => {
            let m = s.mdp()?;
            let am = match pattern {
                None => None,
                Some(text) => {
                    let pr = project(s, &m, text)?;
                    Some(match (framework, pr.planning) {
                        (Some(f), _) => match framework_model(&m, &pr.partition, f) {
                            (_, Some(am)) => am,
                            (rs, None) => return reports(&rs, Format::Json),
                        },
                        (None, Some(g)) => AbstractMdp::from_planning(&g),
                        (None, None) => bail!("with --graph, solving an abstraction needs --framework"),
                    })
                }
            };
            let fm = match &am {
                Some(am) => FloatModel::from_abstract(am)?,
                None => FloatModel::from_explicit(&m)?,
            };
            let (vf, pi) = value_iteration(&fm, opts)?;
            render_values(values_json(&fm.ids, &fm.actions, &vf, &pi), format, am.as_ref())
        }
        Solver::Ivi => {
            if framework.is_some_and(|f| f != Framework::Abpmdp) {
                bail!("ivi solves the abpmdp abstraction only");
            }
            let text = pattern.context("ivi needs --pattern")?;
            let m = s.mdp()?;
            let pr = project(s, &m, text)?;
            let am = build_abpmdp(&m, &pr.partition);
            let im = IntervalModel::from_abstract(&am)?;
            let iv = interval_value_iteration(&im, opts)?;
            render_values(interval_json(&im.ids, &iv), format, Some(&am))
        }
        Solver::Astar => {
            if framework.is_some() {
                bail!("astar takes no --framework");
            }
            let t = s.task("astar")?;
            let db = match (pdb, pattern) {
                (Some(path), _) => Some(PatternDatabase::from_text(&read(path)?, t).with_context(|| format!("{}", path.display()))?),
                (None, Some(text)) => Some(build_pdb(t, &Pattern::parse(text, &t.facts)?)?),
                (None, None) => None,
            };
            let r = match &db {
                Some(db) => astar_search(t, |st| db.lookup(st))?,
                None => astar_search(t, |_| Some(0))?,
            };
            let mut v = search_json(&r, if db.is_some() { "pdb" } else { "blind" });
            if let Some(db) = &db {
                v["pattern"] = json!(db.names);
            }
            match format {
                Format::Json => Ok(Outcome::ok(pretty(&v))),
                Format::Text => Ok(Outcome::ok(match (&r.plan, r.cost) {
                    (Some(plan), Some(c)) => format!("cost {c}\n{}\n", plan.steps.join("\n")),
                    _ => "no plan\n".to_string(),
                })),
                Format::Dot => no_dot("astar"),
            }
        }
    }
}
