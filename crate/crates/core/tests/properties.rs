//! Randomized suites over seeded corpora. Each case draws one seed and builds
//! its instance with `projabs::corpus`.

mod common;

use proptest::prelude::*;
use rand::Rng;

use num_traits::One;
use projabs::abstraction::{
    build_abpmdp, build_armdp, build_wfa, check_connection_preserving, check_deterministic, check_no_ambiguity,
    check_representative_independence, compute_csets, default_xi, wfa_feasibility, ArmdpWeights, Partition,
};
use projabs::corpus::{self, GraphParams, TaskParams};
use projabs::pdb::{additive_combine, build_pdb, max_combine};
use projabs::projection::{abstract_graph, check_linearity, project_state, project_task, Pattern, Sampling};
use projabs::solvers::{
    astar_search, goal_distances, interval_value_iteration, value_iteration, FloatModel, IntervalModel, ViOptions,
};
use projabs::statespace::{default_gamma, expand};
use projabs::task::Flavor;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn task(seed: u64, probabilistic: bool) -> projabs::task::PlanningTask {
    let mut rng = corpus::rng(seed);
    let params = if probabilistic { TaskParams::probabilistic(10, 12) } else { TaskParams::classical(10, 12) };
    corpus::random_task(&mut rng, &params)
}

fn with_pattern(seed: u64, probabilistic: bool) -> (projabs::task::PlanningTask, Pattern) {
    let t = task(seed, probabilistic);
    let p = corpus::random_pattern(&mut corpus::rng(seed ^ 0x9e37), t.width());
    (t, p)
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn projections_are_linear(seed in any::<u64>(), prob in any::<bool>()) {
        let (t, p) = with_pattern(seed, prob);
        let v = check_linearity(&t, &p, Sampling::AllStates).unwrap();
        prop_assert!(v.passed(), "{:?}", v.counterexample);
    }

    #[test]
    fn projections_are_representative_independent(seed in any::<u64>(), prob in any::<bool>()) {
        let (t, p) = with_pattern(seed, prob);
        let m = expand(&t, &default_gamma()).unwrap();
        let part = Partition::by_pattern(&m, &p).unwrap();
        prop_assert!(check_representative_independence(&m, &part).passed());
        prop_assert!(check_no_ambiguity(&m, &part).passed());
    }

    #[test]
    fn projection_is_a_graph_homomorphism(seed in any::<u64>(), prob in any::<bool>()) {
        let (t, p) = with_pattern(seed, prob);
        let m = expand(&t, &default_gamma()).unwrap();
        let g = abstract_graph(&project_task(&t, &p), &default_gamma()).unwrap();
        let vectors = m.vectors.as_ref().unwrap();
        let avecs = g.vectors.as_ref().unwrap();
        for (s, a, s2) in m.edges() {
            let (x, y) = (project_state(&vectors[s], &p), project_state(&vectors[s2], &p));
            if x == y {
                continue;
            }
            let (i, j) = (avecs.iter().position(|v| *v == x).unwrap(), avecs.iter().position(|v| *v == y).unwrap());
            let name = &m.actions[a].name;
            let found = g.edges().iter().any(|&(u, b, w)| u == i && w == j && g.actions[b].name == *name);
            prop_assert!(found, "missing abstract edge {} -{}-> {}", x, name, y);
        }
        let image = Partition::by_pattern(&m, &p).unwrap().num_classes();
        prop_assert!(image <= m.num_states());
        prop_assert!(image <= g.num_states());
        prop_assert!((g.num_states() as u64) <= 1u64 << p.len());
    }

    #[test]
    fn containment_chain(seed in any::<u64>(), prob in any::<bool>()) {
        let (t, p) = with_pattern(seed, prob);
        let m = expand(&t, &default_gamma()).unwrap();
        let part = Partition::by_pattern(&m, &p).unwrap();
        let w = corpus::random_wfa_weights(&mut corpus::rng(seed), &part);
        let wfa = build_wfa(&m, &part, &w);
        let armdp = build_armdp(&m, &part, &corpus::xi_from_omega(&m, &part, &w));
        prop_assert_eq!(wfa.point_rows(), armdp.point_rows());
        let abp = build_abpmdp(&m, &part);
        prop_assert_eq!(common::inside_intervals(&wfa, &abp), Ok(()));
        let xi = default_xi(&m, &compute_csets(&m, &part), &part).unwrap();
        prop_assert_eq!(common::inside_intervals(&build_armdp(&m, &part, &xi.weights), &abp), Ok(()));
    }

    #[test]
    fn csets_follow_the_definition(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let m = corpus::random_graph(&mut rng, &GraphParams::new(10, 3, true));
        let part = corpus::random_partition(&mut rng, &m, 4);
        let cs = compute_csets(&m, &part);
        prop_assert_eq!(&cs, &compute_csets(&m, &part));
        prop_assert_eq!(common::csets_match_definition(&m, &part, &cs), Ok(()));
    }

    #[test]
    fn wfa_verdict_matches_brute_force(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let m = corpus::random_graph(&mut rng, &GraphParams::new(10, 3, false));
        let part = corpus::random_partition(&mut rng, &m, 5);
        let verdict = wfa_feasibility(&compute_csets(&m, &part), &part);
        prop_assert_eq!(common::wfa_agreement(&m, &part, &verdict), Ok(()));
    }

    /// Deterministic input, no ambiguity and any ξ with unit mass on every
    /// target C-set give a deterministic, connection-preserving ARMDP.
    #[test]
    fn armdp_rows_carry_unit_mass(seed in any::<u64>(), from_task in any::<bool>()) {
        let mut rng = corpus::rng(seed);
        let (m, part) = if from_task {
            let t = corpus::random_task(&mut rng, &TaskParams::classical(10, 12));
            let m = expand(&t, &default_gamma()).unwrap();
            let p = corpus::random_pattern(&mut rng, t.width());
            let part = Partition::by_pattern(&m, &p).unwrap();
            (m, part)
        } else {
            let m = corpus::random_graph(&mut rng, &GraphParams::new(10, 3, false));
            let part = corpus::random_partition(&mut rng, &m, 4);
            (m, part)
        };
        prop_assume!(check_no_ambiguity(&m, &part).passed());
        let cs = compute_csets(&m, &part);
        let mut xi = ArmdpWeights::new();
        for (&(c, a), applicable) in &cs.applicable {
            let targets = cs.of_pair(c, a);
            let support: Vec<usize> = match targets.first() {
                Some((_, first)) => first.iter().copied().filter(|s| targets.iter().all(|(_, ms)| ms.contains(s))).collect(),
                None => applicable.clone(),
            };
            xi.insert((c, a), corpus::random_distribution(&mut rng, &support));
        }
        let am = build_armdp(&m, &part, &xi);
        prop_assert!(check_deterministic(&am).unwrap().passed());
        let cp = check_connection_preserving(&m, &part, &am);
        prop_assert!(cp.passed(), "{:?}", cp.witness);
    }

    #[test]
    fn default_xi_rewards_goal_reaching_pairs(seed in any::<u64>()) {
        let (t, p) = with_pattern(seed, false);
        let m = expand(&t, &default_gamma()).unwrap();
        let part = Partition::by_pattern(&m, &p).unwrap();
        let cs = compute_csets(&m, &part);
        let am = build_armdp(&m, &part, &default_xi(&m, &cs, &part).unwrap().weights);
        for &(c, a, _) in cs.goal_sets.keys() {
            let r = am.point_row(c, a).unwrap();
            prop_assert!(r.reward.is_one(), "R({}, {}) = {}", c, a, r.reward);
        }
    }

    #[test]
    fn value_iteration_contracts(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let m = corpus::random_graph(&mut rng, &GraphParams::new(12, 3, true));
        let fm = FloatModel::from_explicit(&m).unwrap();
        let (v, pi) = value_iteration(&fm, &ViOptions::default()).unwrap();
        prop_assert!(v.converged);
        for w in v.residuals.windows(2) {
            prop_assert!(w[1] <= fm.gamma * w[0] + 1e-14, "{} after {}", w[1], w[0]);
        }
        for (s, a) in pi.actions.iter().enumerate() {
            if let Some(a) = a {
                prop_assert!(m.row(s, *a).is_some());
            }
        }
    }

    #[test]
    fn interval_bounds_sandwich_vertex_selections(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let (m, part) = corpus::random_interval_source(&mut rng, 4);
        let abp = build_abpmdp(&m, &part);
        prop_assume!(common::selection_count(&common::row_selections(&abp, true)) <= 20_000);
        let opts = ViOptions { epsilon: 1e-12, ..ViOptions::default() };
        let iv = interval_value_iteration(&IntervalModel::from_abstract(&abp).unwrap(), &opts).unwrap();
        let r = common::sandwich(&abp, &iv.lower.values, &iv.upper.values, true, 1e-9);
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn goal_distances_satisfy_bellman(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let t = corpus::random_task(&mut rng, &TaskParams { max_cost: 3, ..TaskParams::classical(10, 12) });
        let m = expand(&t, &default_gamma()).unwrap();
        let d = goal_distances(&m).unwrap();
        for s in 0..m.num_states() {
            let best = m.rows[s]
                .iter()
                .filter_map(|r| d[r.successors[0].0].map(|x| x + u64::from(m.actions[r.action].cost)))
                .min();
            let want = if m.is_goal(s) { Some(0) } else { best };
            prop_assert_eq!(d[s], want);
        }
    }

    #[test]
    fn astar_finds_the_optimum(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let t = corpus::random_solvable_task(&mut rng, &TaskParams { max_cost: 3, ..TaskParams::classical(12, 12) });
        let p = corpus::random_pattern(&mut rng, t.width());
        let opt = common::distances(&t)[&t.init];
        let db = build_pdb(&t, &p).unwrap();
        prop_assert_eq!(astar_search(&t, |_| Some(0)).unwrap().cost, opt);
        prop_assert_eq!(astar_search(&t, |s| db.lookup(s)).unwrap().cost, opt);
    }

    #[test]
    fn pdbs_are_admissible_and_consistent(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let t = corpus::random_solvable_task(&mut rng, &TaskParams { max_cost: 3, ..TaskParams::classical(12, 12) });
        prop_assert_eq!(t.flavor, Flavor::Classical);
        let p = corpus::random_pattern(&mut rng, t.width());
        let db = build_pdb(&t, &p).unwrap();
        let h = common::distances(&t);
        let m = expand(&t, &default_gamma()).unwrap();
        let v = m.vectors.as_ref().unwrap();
        for s in v {
            // None means infinity on both sides
            prop_assert!(db.lookup(s).is_some() || h[s].is_none());
            if let (Some(a), Some(b)) = (db.lookup(s), h[s]) {
                prop_assert!(a <= b);
            }
        }
        for (s, a, s2) in m.edges() {
            let c = u64::from(m.actions[a].cost);
            match (db.lookup(&v[s]), db.lookup(&v[s2])) {
                (Some(x), Some(y)) => prop_assert!(x <= c + y),
                (None, Some(_)) => prop_assert!(false, "dead end with a live successor"),
                _ => {}
            }
        }
    }

    #[test]
    fn combined_pdbs_stay_admissible(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let t = corpus::random_solvable_task(&mut rng, &TaskParams { max_cost: 3, ..TaskParams::classical(12, 12) });
        // split the facts into up to three disjoint patterns
        let mut groups = vec![Vec::new(); 3];
        for f in 0..t.width() {
            let g = rng.random_range(0..4);
            if g < 3 {
                groups[g].push(f);
            }
        }
        let dbs: Vec<_> = groups.into_iter().map(|g| build_pdb(&t, &Pattern::new(g, t.width()).unwrap()).unwrap()).collect();
        let h = common::distances(&t);
        let hmax = max_combine(&dbs).unwrap();
        let additive = additive_combine(&t, &dbs).unwrap();
        for (s, hs) in &h {
            let Some(hs) = hs else { continue };
            prop_assert!(hmax(s).is_some_and(|x| x <= *hs));
            if let Ok(hadd) = &additive {
                prop_assert!(hadd(s).is_some_and(|x| x <= *hs), "additive {:?} > {}", hadd(s), hs);
            }
        }
    }
}
