//! Small hand-built networks used throughout the tests and examples.

use crate::model::{Network, NetworkBuilder};

const BINARY: [&str; 2] = ["f", "t"];

/// `A -> B` with P(A) = (0.3, 0.7), P(B|A=f) = (0.9, 0.1), P(B|A=t) = (0.2, 0.8).
pub fn chain() -> Network {
    NetworkBuilder::new()
        .named("chain")
        .variable("A", &BINARY)
        .variable("B", &BINARY)
        .cpt("A", &[], vec![vec![0.3, 0.7]])
        .cpt("B", &["A"], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
        .build()
        .expect("chain fixture is valid")
}

/// The six-variable loop network: `x1 -> {x2, x3, x4}`, `x2 -> {x4, x5}`,
/// `x3 -> x5`, `x5 -> x6`, with fixed binary tables.
pub fn two_loops() -> Network {
    two_loops_with(&[
        vec![vec![0.4, 0.6]],
        vec![vec![0.7, 0.3], vec![0.2, 0.8]],
        vec![vec![0.6, 0.4], vec![0.1, 0.9]],
        vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.4, 0.6], vec![0.2, 0.8]],
        vec![vec![0.95, 0.05], vec![0.3, 0.7], vec![0.25, 0.75], vec![0.05, 0.95]],
        vec![vec![0.8, 0.2], vec![0.1, 0.9]],
    ])
}

/// The two-loop topology with caller-supplied tables for x1..x6 in order.
pub fn two_loops_with(tables: &[Vec<Vec<f64>>; 6]) -> Network {
    let parents: [&[&str]; 6] = [&[], &["x1"], &["x1"], &["x1", "x2"], &["x2", "x3"], &["x5"]];
    let mut b = NetworkBuilder::new().named("two_loops");
    for i in 1..=6 {
        b.add_variable(&format!("x{i}"), &BINARY);
    }
    for (i, (ps, rows)) in parents.iter().zip(tables).enumerate() {
        b.add_cpt(&format!("x{}", i + 1), ps, rows.clone());
    }
    b.build().expect("two_loops tables must be well formed")
}

/// `A -> {B, C} -> D`: the smallest loop.
pub fn diamond() -> Network {
    NetworkBuilder::new()
        .named("diamond")
        .variable("A", &BINARY)
        .variable("B", &BINARY)
        .variable("C", &BINARY)
        .variable("D", &BINARY)
        .cpt("A", &[], vec![vec![0.35, 0.65]])
        .cpt("B", &["A"], vec![vec![0.8, 0.2], vec![0.3, 0.7]])
        .cpt("C", &["A"], vec![vec![0.25, 0.75], vec![0.6, 0.4]])
        .cpt(
            "D",
            &["B", "C"],
            vec![vec![0.9, 0.1], vec![0.4, 0.6], vec![0.35, 0.65], vec![0.05, 0.95]],
        )
        .build()
        .expect("diamond fixture is valid")
}

/// Two causes with a noisy-OR common effect.
///
/// Each cause is present with probability `prior`; a present cause triggers
/// the effect with probability `activation`, and the effect can also fire on
/// its own with probability `leak`.
pub fn noisy_or(prior: f64, activation: f64, leak: f64) -> Network {
    let miss = 1.0 - activation;
    let on = |active: i32| 1.0 - (1.0 - leak) * miss.powi(active);
    NetworkBuilder::new()
        .named("noisy_or")
        .variable("cause1", &BINARY)
        .variable("cause2", &BINARY)
        .variable("effect", &BINARY)
        .cpt("cause1", &[], vec![vec![1.0 - prior, prior]])
        .cpt("cause2", &[], vec![vec![1.0 - prior, prior]])
        .cpt(
            "effect",
            &["cause1", "cause2"],
            [0, 1, 1, 2]
                .into_iter()
                .map(|n| vec![1.0 - on(n), on(n)])
                .collect(),
        )
        .build()
        .expect("noisy-or fixture is valid")
}
