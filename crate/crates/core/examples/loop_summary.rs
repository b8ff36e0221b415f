//! Recurrences, closed forms and guard of a loop body.
//!
//! The body increments `x` and adds the new `x` to `y`, so `y` is a
//! stratified recurrence with a quadratic closed form.

use std::sync::Arc;

use lra::formula::{parse_transition, Var};
use lra::recurrence::{star, IterationConfig};
use lra::smt::{SolverConfig, SolverSession};

fn main() {
    let vars: Arc<[Var]> = ["x", "y", "z"].iter().map(|n| Var::new(n)).collect();
    let body = parse_transition(&vars, "x <= 10 && x' = x + 1 && y' = y + x' && z' = 2*x'").unwrap();
    let mut session = SolverSession::new(SolverConfig::default()).expect("solver");
    let s = star(&mut session, &body, &IterationConfig::default()).expect("star");
    for (r, c) in s.recurrences.iter().zip(&s.closed_forms) {
        println!("{:<24} {c}", r.to_string());
    }
    println!("guard: {}", s.guard);
}
