// Parse a network file, report problems with positions, write it back.
//
// `cargo run --example file_format`

use beliefnet::netformat::{parse, parse_draft, serialize};

const GOOD: &str = "\
net tiny
var Alarm : off on
var Call : no yes
cpt Alarm :
  0.99 0.01
cpt Call | Alarm :
  off : 0.95 0.05
  on : 0.1 0.9
";

const BROKEN: &str = "\
var Alarm : off on
cpt Alarm :
  0.99 0.1
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = parse(GOOD)?;
    let text = serialize(&net);
    print!("{text}");
    assert_eq!(parse(&text)?, net);

    match parse_draft(BROKEN) {
        Ok(_) => unreachable!("row sums to 1.09"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
