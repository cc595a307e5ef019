//! Seeded random networks and evidence for property tests, benchmarks and
//! examples.
//!
//! Variables are named `v00`, `v01`, ... so that name order equals
//! declaration order. Every CPT entry lies strictly inside (0, 1), hence any
//! evidence has positive probability.

use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::Rng;

use crate::model::{Evidence, Network, NetworkBuilder, VarId};

fn state_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("s{i}")).collect()
}

fn random_row(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= sum);
    row
}

fn assemble(rng: &mut impl Rng, cards: &[usize], parents: &[Vec<usize>]) -> Network {
    let names: Vec<String> = (0..cards.len()).map(|i| format!("v{i:02}")).collect();
    let mut b = NetworkBuilder::new();
    for (name, &k) in names.iter().zip(cards) {
        b.add_variable(name, &state_labels(k));
    }
    for (i, ps) in parents.iter().enumerate() {
        let rows: usize = ps.iter().map(|&p| cards[p]).product();
        let table = (0..rows).map(|_| random_row(rng, cards[i])).collect();
        let pnames: Vec<&str> = ps.iter().map(|&p| names[p].as_str()).collect();
        b.add_cpt(&names[i], &pnames, table);
    }
    b.build().expect("generated networks are valid")
}

/// A connected polytree with `nodes` variables: each new node is linked to
/// one earlier node, with the arc pointing either way.
pub fn random_polytree(rng: &mut impl Rng, nodes: usize, states: RangeInclusive<usize>) -> Network {
    let cards: Vec<usize> = (0..nodes).map(|_| rng.gen_range(states.clone())).collect();
    let mut parents = vec![Vec::new(); nodes];
    for i in 1..nodes {
        let j = rng.gen_range(0..i);
        if rng.gen_bool(0.5) {
            parents[i].push(j);
        } else {
            parents[j].push(i);
        }
    }
    assemble(rng, &cards, &parents)
}

/// A random DAG: node `i` draws up to `max_parents` parents among `0..i`.
pub fn random_dag(
    rng: &mut impl Rng,
    nodes: usize,
    max_parents: usize,
    states: RangeInclusive<usize>,
) -> Network {
    let cards: Vec<usize> = (0..nodes).map(|_| rng.gen_range(states.clone())).collect();
    let parents: Vec<Vec<usize>> = (0..nodes)
        .map(|i| {
            let count = rng.gen_range(0..=max_parents.min(i));
            let mut ps = sample(rng, i, count).into_vec();
            ps.sort_unstable();
            ps
        })
        .collect();
    assemble(rng, &cards, &parents)
}

/// A random binary DAG with at least one undirected loop.
pub fn random_loopy(rng: &mut impl Rng, nodes: usize, max_parents: usize) -> Network {
    assert!(nodes >= 3 && max_parents >= 2, "a loop needs three nodes and a two-parent node");
    loop {
        let net = random_dag(rng, nodes, max_parents, 2..=2);
        if !net.is_singly_connected() {
            return net;
        }
    }
}

/// Observes `count` distinct random variables at random states.
pub fn random_evidence(rng: &mut impl Rng, net: &Network, count: usize) -> Evidence {
    let mut ev = Evidence::new();
    for i in sample(rng, net.len(), count.min(net.len())) {
        let v = VarId(i);
        ev.observe(v, rng.gen_range(0..net.cardinality(v)));
    }
    ev
}
