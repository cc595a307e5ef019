// A second observed cause lowers belief in the first.
//
// `cargo run --example explaining_away`

use beliefnet::fixtures;
use beliefnet::oracle::oracle_marginal;
use beliefnet::{Evidence, PolytreeEngine, PropagationOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = fixtures::noisy_or(0.1, 0.8, 0.01);
    let (c1, c2, effect) = (net.var("cause1")?, net.var("cause2")?, net.var("effect")?);
    let engine = PolytreeEngine::new(&net)?;
    let opts = PropagationOptions::default();

    let mut evidence = Evidence::new();
    let prior = engine.posterior(&evidence, &opts)?[c1.0][1];
    evidence.observe(effect, 1);
    let with_effect = engine.posterior(&evidence, &opts)?[c1.0][1];
    evidence.observe(c2, 1);
    let explained = engine.posterior(&evidence, &opts)?[c1.0][1];

    println!("P(cause1)                   = {prior:.6}");
    println!("P(cause1 | effect)          = {with_effect:.6}");
    println!("P(cause1 | effect, cause2)  = {explained:.6}");
    let exact = oracle_marginal(&net, &evidence, c1)?[1];
    assert!((explained - exact).abs() < 1e-12);
    assert!(explained < with_effect);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
