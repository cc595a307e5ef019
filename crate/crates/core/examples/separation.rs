// d-separation queries with the per-path verdicts.
//
// `cargo run --example separation`

use std::collections::BTreeSet;

use beliefnet::dsep::analyze;
use beliefnet::fixtures;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = fixtures::two_loops();
    let (x2, x3) = (net.var("x2")?, net.var("x3")?);
    for given in [&["x1"][..], &["x1", "x4"], &["x1", "x6"]] {
        let set = given.iter().map(|n| net.var(n)).collect::<Result<BTreeSet<_>, _>>()?;
        let report = analyze(&net, x2, x3, &set)?;
        let verdict = if report.separated { "d-separated" } else { "connected" };
        println!("x2, x3 given {{{}}}: {verdict}", given.join(", "));
        for (path, blocker) in &report.paths {
            match blocker {
                Some(b) => println!("  {}  blocked at {}", path.display(&net), net.var_name(*b)),
                None => println!("  {}  open", path.display(&net)),
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
