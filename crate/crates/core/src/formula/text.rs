//! Reading formulas from the surface expression syntax, with `x'` denoting
//! the post-state copy of `x`.

use std::sync::Arc;

use super::formula::Formula;
use super::semantics::{bool_to_formula, expr_to_term};
use super::symbol::{Symbol, Var};
use super::term::Term;
use super::transition::TransitionFormula;
use crate::lang::{parse_bool_expr, parse_expr, ParseError};

fn resolve(name: &str) -> Symbol {
    match name.strip_suffix('\'') {
        Some(base) => Var::new(base).post(),
        None => Var::new(name).pre(),
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    Ok(expr_to_term(&parse_expr(src)?, &resolve))
}

pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    Ok(bool_to_formula(&parse_bool_expr(src)?, &resolve))
}

pub fn parse_transition(vars: &Arc<[Var]>, src: &str) -> Result<TransitionFormula, ParseError> {
    Ok(TransitionFormula::new(vars.clone(), parse_formula(src)?))
}
