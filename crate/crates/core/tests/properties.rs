use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use beliefnet::conditioning::{auto_infer, infer_conditioned, ConditioningOptions};
use beliefnet::cutset::{greedy_cutset, is_valid_cutset, min_cutset_exhaustive, EXHAUSTIVE_LIMIT};
use beliefnet::dsep::{analyze, d_separated};
use beliefnet::generate::{random_dag, random_evidence, random_loopy, random_polytree};
use beliefnet::model::{Evidence, Network, VarId};
use beliefnet::netformat::{parse, serialize};
use beliefnet::oracle::{oracle_evidence_probability, oracle_marginals};
use beliefnet::polytree::{LogLikelihood, PolytreeEngine, PropagationOptions};
use beliefnet::ArcId;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_polytree(seed: u64) -> (Network, Evidence) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=9);
    let net = random_polytree(&mut r, n, 2..=3);
    let k = r.gen_range(0..=3);
    let ev = random_evidence(&mut r, &net, k);
    (net, ev)
}

fn for_each_assignment(cards: &[usize], mut f: impl FnMut(&[usize])) {
    let mut a = vec![0; cards.len()];
    loop {
        f(&a);
        let mut i = cards.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            a[i] += 1;
            if a[i] < cards[i] {
                break;
            }
            a[i] = 0;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn joint_sums_to_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let net = random_dag(&mut r, n, 3, 2..=3);
        let cards: Vec<usize> = net.ids().map(|v| net.cardinality(v)).collect();
        let mut total = 0.0;
        for_each_assignment(&cards, |a| total += net.joint_probability(a).unwrap());
        prop_assert!((total - 1.0).abs() <= 1e-9, "total {total}");
    }

    #[test]
    fn serialize_parse_is_stable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=10);
        let net = random_dag(&mut r, n, 3, 2..=4);
        let text = serialize(&net);
        let once = parse(&text).unwrap();
        let twice = parse(&serialize(&once)).unwrap();
        prop_assert_eq!(twice.variables(), once.variables());
        prop_assert_eq!(twice.arcs(), once.arcs());
        // Renormalization at load can move the twelfth digit.
        for (a, b) in once.cpts().iter().zip(twice.cpts()) {
            prop_assert_eq!(a.parents(), b.parents());
            for (x, y) in a.rows().flatten().zip(b.rows().flatten()) {
                prop_assert!((x - y).abs() <= 1e-11);
            }
        }
        // Twelve significant digits on output.
        for (a, b) in net.cpts().iter().zip(once.cpts()) {
            for (x, y) in a.rows().flatten().zip(b.rows().flatten()) {
                prop_assert!((x - y).abs() <= 1e-11);
            }
        }
    }

    #[test]
    fn dsep_is_symmetric(seed in any::<u64>(), mask in any::<u16>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=9);
        let net = random_dag(&mut r, n, 3, 2..=2);
        let x = VarId(r.gen_range(0..n));
        let y = VarId(r.gen_range(0..n));
        prop_assume!(x != y);
        let given: BTreeSet<VarId> =
            net.ids().filter(|&v| v != x && v != y && mask >> v.0 & 1 == 1).collect();
        prop_assert_eq!(d_separated(&net, x, y, &given).unwrap(), d_separated(&net, y, x, &given).unwrap());
    }

    #[test]
    fn dropping_a_non_collider_only_unblocks(seed in any::<u64>(), mask in any::<u16>()) {
        let mut r = rng(seed);
        let n = r.gen_range(3..=8);
        let net = random_dag(&mut r, n, 3, 2..=2);
        let (x, y) = (VarId(0), VarId(n - 1));
        let given: BTreeSet<VarId> =
            net.ids().filter(|&v| v != x && v != y && mask >> v.0 & 1 == 1).collect();
        let full = analyze(&net, x, y, &given).unwrap();
        for &z in &given {
            let mut fewer = given.clone();
            fewer.remove(&z);
            let reduced = analyze(&net, x, y, &fewer).unwrap();
            for ((path, before), (_, after)) in full.paths.iter().zip(&reduced.paths) {
                let non_collider = |v: VarId| {
                    path.interior().any(|(w, c)| w == v && c != beliefnet::dsep::Connection::Converging)
                };
                if non_collider(z) {
                    prop_assert_ne!(*after, Some(z));
                }
                if let Some(w) = *before {
                    if w != z && non_collider(w) {
                        prop_assert!(after.is_some());
                    }
                }
            }
        }
    }

    #[test]
    fn likelihood_is_pivot_independent(seed in any::<u64>()) {
        let (net, ev) = small_polytree(seed);
        let engine = PolytreeEngine::new(&net).unwrap();
        let want = oracle_evidence_probability(&net, &ev).unwrap().ln();
        for pivot in net.ids() {
            match engine.evidence_log_likelihood_from(&ev, pivot).unwrap() {
                LogLikelihood::Finite(got) => prop_assert!((got - want).abs() <= 1e-9, "{got} vs {want}"),
                LogLikelihood::Impossible => prop_assert!(false, "positive CPTs cannot give zero mass"),
            }
        }
    }

    #[test]
    fn vacuous_lambda_is_uniform(seed in any::<u64>()) {
        let (net, ev) = small_polytree(seed);
        let engine = PolytreeEngine::new(&net).unwrap();
        let fix = engine.propagate(&ev, &PropagationOptions::default()).unwrap();
        for (a, &(parent, child)) in net.arcs().iter().enumerate() {
            // Everything reachable from `child` without crossing back to `parent`.
            let mut side = BTreeSet::from([child]);
            let mut stack = vec![child];
            while let Some(v) = stack.pop() {
                for w in net.neighbors(v) {
                    if !(v == child && w == parent) && side.insert(w) {
                        stack.push(w);
                    }
                }
            }
            if side.iter().all(|&v| !ev.contains(v)) {
                let k = net.cardinality(parent) as f64;
                for &x in &fix.state.link(ArcId(a)).lambda {
                    prop_assert!((x - 1.0 / k).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn link_belief_matches_node_belief(seed in any::<u64>()) {
        let (net, ev) = small_polytree(seed);
        let engine = PolytreeEngine::new(&net).unwrap();
        let fix = engine.propagate(&ev, &PropagationOptions::default()).unwrap();
        prop_assert!(engine.is_equilibrium(&fix.state, 1e-12));
        for (a, &(parent, _)) in net.arcs().iter().enumerate() {
            let link = engine.link_belief(&fix.state, ArcId(a)).unwrap();
            let node = engine.fuse_belief(&fix.state, parent).unwrap();
            prop_assert!(link.max_abs_diff(&node) <= 1e-9);
        }
    }

    #[test]
    fn run_weights_add_up_to_evidence_probability(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(4..=9);
        let net = random_loopy(&mut r, n, 3);
        let k = r.gen_range(0..=3);
        let ev = random_evidence(&mut r, &net, k);
        let cut = greedy_cutset(&net);
        let (mixed, runs) = infer_conditioned(&net, &ev, &cut, &[], &ConditioningOptions::default()).unwrap();
        let want = oracle_evidence_probability(&net, &ev).unwrap();
        let total: f64 = runs.iter().map(|run| run.log_weight.probability()).sum();
        prop_assert!((total - want).abs() <= 1e-9);
        prop_assert!((mixed.log_evidence.exp() - want).abs() <= 1e-9);
        let weights: f64 = runs.iter().map(|run| run.weight).sum();
        prop_assert!((weights - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn auto_infer_matches_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=9);
        let net = random_dag(&mut r, n, 3, 2..=3);
        let k = r.gen_range(0..=2);
        let ev = random_evidence(&mut r, &net, k);
        let queries: Vec<VarId> = net.ids().collect();
        let mixed = auto_infer(&net, &ev, &queries, &ConditioningOptions::default()).unwrap();
        let want = oracle_marginals(&net, &ev).unwrap();
        for (q, b) in &mixed.beliefs {
            prop_assert!(b.max_abs_diff(&want[q.0]) <= 1e-9);
        }
    }

    #[test]
    fn greedy_cutset_is_valid_and_leaves_a_forest(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=14);
        let net = random_dag(&mut r, n, 3, 2..=2);
        let cut = greedy_cutset(&net);
        prop_assert!(is_valid_cutset(&net, cut.members()));
        let kept = net.arcs().iter().filter(|(p, _)| !cut.contains(*p)).count();
        prop_assert!(kept < net.len().max(1));
    }
}

/// Greedy-versus-minimum cutset size on random nets up to 12 nodes. Every
/// miss is printed before the assertion fires.
#[test]
fn greedy_cutset_is_within_twice_the_minimum() {
    let mut r = rng(0xc075);
    let mut misses = Vec::new();
    for i in 0..300 {
        let n = r.gen_range(3..=12);
        let net = random_dag(&mut r, n, 3, 2..=2);
        let greedy = greedy_cutset(&net).len();
        let best = min_cutset_exhaustive(&net, EXHAUSTIVE_LIMIT).unwrap().len();
        assert!(best <= greedy);
        if greedy > 2 * best {
            misses.push(format!("net {i}: greedy {greedy}, minimum {best}"));
        }
    }
    for m in &misses {
        println!("{m}");
    }
    assert!(misses.is_empty(), "{} nets over the 2x bound", misses.len());
}
