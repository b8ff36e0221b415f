//! Reference interpreter over the AST, used to cross-check the CFA.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::ast::*;
use crate::formula::euclid_div_mod;

pub type Env = BTreeMap<String, BigInt>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("variable `{0}` has no value")]
    Unassigned(String),
}

pub fn eval_expr(e: &Expr, env: &Env) -> Result<BigInt, RuntimeError> {
    Ok(match e {
        Expr::Int(n) => n.clone(),
        Expr::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| RuntimeError::Unassigned(v.clone()))?,
        Expr::Neg(a) => -eval_expr(a, env)?,
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval_expr(a, env)?, eval_expr(b, env)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div | BinOp::Mod => {
                    if b.is_zero() {
                        return Err(RuntimeError::DivisionByZero);
                    }
                    let (q, r) = euclid_div_mod(&a, &b).expect("nonzero divisor");
                    if *op == BinOp::Div {
                        q
                    } else {
                        r
                    }
                }
            }
        }
    })
}

pub fn eval_bool(b: &BoolExpr, env: &Env) -> Result<bool, RuntimeError> {
    Ok(match b {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Cmp(op, l, r) => {
            let (l, r) = (eval_expr(l, env)?, eval_expr(r, env)?);
            match op {
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Eq => l == r,
                CmpOp::Ne => l != r,
                CmpOp::Ge => l >= r,
                CmpOp::Gt => l > r,
            }
        }
        BoolExpr::And(l, r) => eval_bool(l, env)? && eval_bool(r, env)?,
        BoolExpr::Or(l, r) => eval_bool(l, env)? || eval_bool(r, env)?,
        BoolExpr::Not(a) => !eval_bool(a, env)?,
    })
}

/// Source of nondeterministic choices.
pub trait Choices {
    fn branch(&mut self) -> bool;
    fn havoc(&mut self, var: &str) -> BigInt;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AstOutcome {
    Terminated,
    AssertFailed { line: usize },
    /// An `assume` did not hold.
    Blocked,
    OutOfFuel,
    Error(RuntimeError),
}

#[derive(Clone, Debug)]
pub struct AstRun {
    pub outcome: AstOutcome,
    /// The initial state followed by the state after every primitive step.
    /// Primitive steps are the ones a CFA edge performs: assignments, havocs,
    /// assumes, branch and loop tests, skips, and stepping past an assertion.
    pub states: Vec<Env>,
}

struct Interp<'a> {
    env: Env,
    states: Vec<Env>,
    fuel: usize,
    choices: &'a mut dyn Choices,
}

impl Interp<'_> {
    fn step(&mut self) -> Result<(), AstOutcome> {
        if self.fuel == 0 {
            return Err(AstOutcome::OutOfFuel);
        }
        self.fuel -= 1;
        self.states.push(self.env.clone());
        Ok(())
    }

    fn test(&mut self, c: &Cond) -> Result<bool, AstOutcome> {
        match c {
            Cond::Nondet => Ok(self.choices.branch()),
            Cond::Expr(b) => eval_bool(b, &self.env).map_err(AstOutcome::Error),
        }
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), AstOutcome> {
        stmts.iter().try_for_each(|s| self.stmt(s))
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), AstOutcome> {
        match s {
            Stmt::Skip => self.step(),
            Stmt::Assign { var, expr } => {
                let v = eval_expr(expr, &self.env).map_err(AstOutcome::Error)?;
                self.env.insert(var.clone(), v);
                self.step()
            }
            Stmt::Havoc(var) => {
                let v = self.choices.havoc(var);
                self.env.insert(var.clone(), v);
                self.step()
            }
            Stmt::Assume(b) => {
                if !eval_bool(b, &self.env).map_err(AstOutcome::Error)? {
                    return Err(AstOutcome::Blocked);
                }
                self.step()
            }
            Stmt::Assert { cond, span } => {
                if !eval_bool(cond, &self.env).map_err(AstOutcome::Error)? {
                    return Err(AstOutcome::AssertFailed { line: span.line });
                }
                self.step()
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let taken = self.test(cond)?;
                self.step()?;
                self.block(if taken { then_branch } else { else_branch })
            }
            Stmt::While { cond, body, .. } => loop {
                let taken = self.test(cond)?;
                self.step()?;
                if !taken {
                    return Ok(());
                }
                self.block(body)?;
            },
        }
    }
}

/// Runs `p` from `init` for at most `fuel` primitive steps.
pub fn run_program(p: &Program, init: Env, choices: &mut dyn Choices, fuel: usize) -> AstRun {
    let mut it = Interp {
        env: init.clone(),
        states: vec![init],
        fuel,
        choices,
    };
    let outcome = match it.block(&p.body) {
        Ok(()) => AstOutcome::Terminated,
        Err(o) => o,
    };
    AstRun {
        outcome,
        states: it.states,
    }
}
