macro_rules! example {
    ($module:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(chain_posterior, "chain_posterior.rs");
example!(separation, "separation.rs");
example!(explaining_away, "explaining_away.rs");
example!(loop_conditioning, "loop_conditioning.rs");
example!(relaxation_trace, "relaxation_trace.rs");
example!(file_format, "file_format.rs");

#[test]
fn chain_posterior_runs() {
    chain_posterior::run_example().expect("chain_posterior should run");
}

#[test]
fn separation_runs() {
    separation::run_example().expect("separation should run");
}

#[test]
fn explaining_away_runs() {
    explaining_away::run_example().expect("explaining_away should run");
}

#[test]
fn loop_conditioning_runs() {
    loop_conditioning::run_example().expect("loop_conditioning should run");
}

#[test]
fn relaxation_trace_runs() {
    relaxation_trace::run_example().expect("relaxation_trace should run");
}

#[test]
fn file_format_runs() {
    file_format::run_example().expect("file_format should run");
}
