use std::sync::Arc;

use super::formula::Formula;
use super::symbol::{Symbol, Var};
use super::term::Term;
use super::transition::{stable, TransitionFormula};
use crate::lang::{BinOp, BoolExpr, CmpOp, EdgeLabel, Expr};

/// Translates a program expression, resolving each variable name with `sym`.
pub fn expr_to_term<F>(e: &Expr, sym: &F) -> Term
where
    F: Fn(&str) -> Symbol,
{
    match e {
        Expr::Int(n) => Term::constant(crate::Rational::from_integer(n.clone())),
        Expr::Var(v) => Term::sym(sym(v)),
        Expr::Neg(a) => -expr_to_term(a, sym),
        Expr::Bin(op, a, b) => {
            let (a, b) = (expr_to_term(a, sym), expr_to_term(b, sym));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a.mul(&b),
                BinOp::Div => Term::div(&a, &b),
                BinOp::Mod => Term::modulo(&a, &b),
            }
        }
    }
}

/// Translates a boolean expression into a formula in negation normal form.
pub fn bool_to_formula<F>(b: &BoolExpr, sym: &F) -> Formula
where
    F: Fn(&str) -> Symbol,
{
    match b {
        BoolExpr::True => Formula::True,
        BoolExpr::False => Formula::False,
        BoolExpr::Cmp(op, l, r) => Formula::cmp(expr_to_term(l, sym), *op, expr_to_term(r, sym)),
        BoolExpr::And(l, r) => Formula::and(vec![bool_to_formula(l, sym), bool_to_formula(r, sym)]),
        BoolExpr::Or(l, r) => Formula::or(vec![bool_to_formula(l, sym), bool_to_formula(r, sym)]),
        BoolExpr::Not(a) => negated(a, sym),
    }
}

fn negated<F>(b: &BoolExpr, sym: &F) -> Formula
where
    F: Fn(&str) -> Symbol,
{
    match b {
        BoolExpr::Cmp(op, l, r) => {
            let flipped = match op {
                CmpOp::Lt => CmpOp::Ge,
                CmpOp::Le => CmpOp::Gt,
                CmpOp::Eq => CmpOp::Ne,
                CmpOp::Ne => CmpOp::Eq,
                CmpOp::Ge => CmpOp::Lt,
                CmpOp::Gt => CmpOp::Le,
            };
            Formula::cmp(expr_to_term(l, sym), flipped, expr_to_term(r, sym))
        }
        BoolExpr::And(l, r) => Formula::or(vec![negated(l, sym), negated(r, sym)]),
        BoolExpr::Or(l, r) => Formula::and(vec![negated(l, sym), negated(r, sym)]),
        BoolExpr::Not(a) => bool_to_formula(a, sym),
        BoolExpr::True => Formula::False,
        BoolExpr::False => Formula::True,
    }
}

/// Transition formula of a single CFA edge.
pub fn edge_semantics(label: &EdgeLabel, vars: &Arc<[Var]>) -> TransitionFormula {
    let pre = |name: &str| Var::new(name).pre();
    let formula = match label {
        EdgeLabel::Assign(x, e) => {
            let value = expr_to_term(e, &pre);
            Formula::and(vec![
                Formula::eq(Term::sym(x.post()), value),
                stable(vars.iter().filter(|v| *v != x)),
            ])
        }
        EdgeLabel::Havoc(x) => stable(vars.iter().filter(|v| *v != x)),
        EdgeLabel::Assume(b) => Formula::and(vec![bool_to_formula(b, &pre), stable(vars.iter())]),
    };
    TransitionFormula::new(vars.clone(), formula)
}
