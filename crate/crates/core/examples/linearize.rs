//! Over-approximates a non-linear formula by a linear one.

use lra::formula::parse_formula;
use lra::linearize::lin;
use lra::smt::{SolverConfig, SolverSession};

fn main() {
    let mut session = SolverSession::new(SolverConfig::default()).expect("solver");
    let psi = parse_formula("1 <= x && x <= 3 && 2 <= y && y <= 4 && z = x*y").unwrap();
    let l = lin(&mut session, &psi).expect("linearize");
    println!("input:      {psi}");
    println!("linearized: {}", l.formula);
}
