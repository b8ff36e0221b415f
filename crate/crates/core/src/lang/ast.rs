use std::fmt;

use num_bigint::BigInt;

pub use crate::formula::CmpOp;

/// Source position. Compares equal to every other span so that ASTs can be
/// compared structurally regardless of layout.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(BigInt),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
}

/// Branch or loop condition; `*` is a nondeterministic choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cond {
    Nondet,
    Expr(BoolExpr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Skip,
    Assign {
        var: String,
        expr: Expr,
    },
    Havoc(String),
    Assume(BoolExpr),
    Assert {
        cond: BoolExpr,
        span: Span,
    },
    If {
        cond: Cond,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    While {
        cond: Cond,
        body: Vec<Stmt>,
        span: Span,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    /// Declared variables in declaration order.
    pub vars: Vec<String>,
    pub body: Vec<Stmt>,
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Int(BigInt::from(n))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// True if the expression contains `*` of two non-constant operands, `/` or `%`.
    pub fn has_nonlinear(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Var(_) => false,
            Expr::Neg(e) => e.has_nonlinear(),
            Expr::Bin(op, a, b) => {
                let here = match op {
                    BinOp::Mul => !a.is_constant() && !b.is_constant(),
                    BinOp::Div | BinOp::Mod => true,
                    _ => false,
                };
                here || a.has_nonlinear() || b.has_nonlinear()
            }
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Expr::Int(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(e) => e.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<String>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) => out.push(v.clone()),
            Expr::Neg(e) => e.vars_into(out),
            Expr::Bin(_, a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
        }
    }
}

impl BoolExpr {
    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(a))
    }

    pub fn has_nonlinear(&self) -> bool {
        match self {
            BoolExpr::True | BoolExpr::False => false,
            BoolExpr::Cmp(_, a, b) => a.has_nonlinear() || b.has_nonlinear(),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => a.has_nonlinear() || b.has_nonlinear(),
            BoolExpr::Not(a) => a.has_nonlinear(),
        }
    }
}
