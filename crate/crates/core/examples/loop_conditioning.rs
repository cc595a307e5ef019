// Exact beliefs on a network with loops by conditioning on a cutset.
//
// `cargo run --example loop_conditioning`

use beliefnet::conditioning::premixed_beliefs;
use beliefnet::cutset::greedy_cutset;
use beliefnet::oracle::oracle_marginals;
use beliefnet::{fixtures, infer_conditioned, ConditioningOptions, Evidence, PropagationOptions, VarId};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = fixtures::two_loops();
    let evidence = Evidence::new().with(net.var("x6")?, 1);
    let cutset = greedy_cutset(&net);
    println!("cutset {{{}}}, {} runs", cutset.names(&net).join(", "), cutset.assignment_count(&net));

    let queries: Vec<VarId> = net.ids().collect();
    let (mixed, runs) = infer_conditioned(&net, &evidence, &cutset, &queries, &ConditioningOptions::default())?;
    for run in &runs {
        let case: Vec<String> = run
            .assignment
            .iter()
            .map(|&(v, s)| format!("{}={}", net.var_name(v), net.variable(v).states()[s]))
            .collect();
        println!("  run {}: weight {:.6}", case.join(" "), run.weight);
    }
    println!("P(x6=t) = {:.6}", mixed.log_evidence.exp());

    let exact = oracle_marginals(&net, &evidence)?;
    let premixed = premixed_beliefs(&net, &evidence, &cutset, &PropagationOptions::default())?;
    println!("{:>4} {:>10} {:>10} {:>10}", "var", "mixed", "exact", "premixed");
    for (v, belief) in &mixed.beliefs {
        println!(
            "{:>4} {:>10.6} {:>10.6} {:>10.6}",
            net.var_name(*v),
            belief[1],
            exact[v.0][1],
            premixed[v.0][1]
        );
        assert!(belief.max_abs_diff(&exact[v.0]) < 1e-9);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
