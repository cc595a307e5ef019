// Watch messages settle, sweep by sweep, on a small polytree.
//
// `cargo run --example relaxation_trace`

use beliefnet::netformat::parse;
use beliefnet::polytree::TraceRecord;
use beliefnet::{PolytreeEngine, PropagationOptions};

const NET: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/sprinkler.bn"));

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = parse(NET)?;
    let evidence = beliefnet::netformat::parse_evidence(&["slippery=yes"], &net)?;
    let engine = PolytreeEngine::new(&net)?;
    let mut lines = Vec::new();
    let fix = engine.propagate_traced(&evidence, &PropagationOptions::default(), &mut |r: &TraceRecord| {
        lines.push(r.display(&net).to_string())
    })?;
    for l in &lines {
        println!("{l}");
    }
    println!(
        "{} updates in {} sweeps, diameter {}",
        fix.stats.updates,
        fix.stats.sweeps,
        net.underlying_diameter()
    );
    assert!(fix.stats.sweeps <= 2 * net.underlying_diameter() + 2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
