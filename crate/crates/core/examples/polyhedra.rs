//! Convex and affine hulls of a disjunctive formula.

use std::collections::BTreeSet;

use lra::formula::{parse_formula, Symbol, Var};
use lra::polyhedra::{affine_hull, convex_hull, DEFAULT_BUDGET};
use lra::smt::{SolverConfig, SolverSession};

fn main() {
    let mut session = SolverSession::new(SolverConfig::default()).expect("solver");
    let phi = parse_formula("(x = 0 && y = 0) || (x = 2 && y = 4) || (x = 1 && y = 2 && z > 5)").unwrap();

    let drop_z: BTreeSet<Symbol> = [Var::new("z").pre()].into();
    let c = convex_hull(&mut session, &phi, &drop_z, DEFAULT_BUDGET).expect("hull");
    println!("convex hull: {} ({} cubes)", c.hull.to_formula(), c.iterations);

    let syms = [Var::new("x").pre(), Var::new("y").pre()];
    let a = affine_hull(&mut session, &phi, &syms).expect("hull");
    println!("affine hull: {}", a.hull.to_formula());
}
