// Posterior of a two-node chain, built in code.
//
// `cargo run --example chain_posterior`

use beliefnet::{Evidence, NetworkBuilder, PolytreeEngine, PropagationOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = NetworkBuilder::new()
        .variable("Rain", &["no", "yes"])
        .variable("WetGrass", &["no", "yes"])
        .cpt("Rain", &[], vec![vec![0.8, 0.2]])
        .cpt("WetGrass", &["Rain"], vec![vec![0.9, 0.1], vec![0.15, 0.85]])
        .build()?;

    let rain = net.var("Rain")?;
    let wet = net.var("WetGrass")?;
    let engine = PolytreeEngine::new(&net)?;
    let evidence = Evidence::new().with(wet, net.state(wet, "yes")?);
    let beliefs = engine.posterior(&evidence, &PropagationOptions::default())?;
    println!("P(Rain=yes | WetGrass=yes) = {:.6}", beliefs[rain.0][1]);
    println!("P(WetGrass=yes) = {:.6}", engine.evidence_log_likelihood(&evidence)?.probability());
    assert!((beliefs[rain.0][1] - 0.17 / 0.25).abs() < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
