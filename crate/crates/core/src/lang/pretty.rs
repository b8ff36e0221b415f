use std::fmt::Write;

use super::ast::*;

fn op_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Mod => "%",
    }
}

fn cmp_str(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Eq => "=",
        CmpOp::Ne => "!=",
        CmpOp::Ge => ">=",
        CmpOp::Gt => ">",
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Var(v) => v.clone(),
        Expr::Neg(e) => format!("-({})", expr_to_string(e)),
        Expr::Bin(op, a, b) => format!(
            "({} {} {})",
            expr_to_string(a),
            op_str(*op),
            expr_to_string(b)
        ),
    }
}

pub fn bool_to_string(b: &BoolExpr) -> String {
    match b {
        BoolExpr::True => "true".into(),
        BoolExpr::False => "false".into(),
        BoolExpr::Cmp(op, a, b) => {
            format!("{} {} {}", expr_to_string(a), cmp_str(*op), expr_to_string(b))
        }
        BoolExpr::And(a, b) => format!("({} && {})", bool_to_string(a), bool_to_string(b)),
        BoolExpr::Or(a, b) => format!("({} || {})", bool_to_string(a), bool_to_string(b)),
        BoolExpr::Not(a) => format!("!({})", bool_to_string(a)),
    }
}

fn cond_to_string(c: &Cond) -> String {
    match c {
        Cond::Nondet => "*".into(),
        Cond::Expr(b) => bool_to_string(b),
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        write_stmt(out, s, depth);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "  ".repeat(depth);
    match s {
        Stmt::Skip => writeln!(out, "{pad}skip;").unwrap(),
        Stmt::Assign { var, expr } => writeln!(out, "{pad}{var} := {};", expr_to_string(expr)).unwrap(),
        Stmt::Havoc(v) => writeln!(out, "{pad}havoc {v};").unwrap(),
        Stmt::Assume(b) => writeln!(out, "{pad}assume({});", bool_to_string(b)).unwrap(),
        Stmt::Assert { cond, .. } => writeln!(out, "{pad}assert({});", bool_to_string(cond)).unwrap(),
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            writeln!(out, "{pad}if ({}) {{", cond_to_string(cond)).unwrap();
            write_block(out, then_branch, depth + 1);
            if else_branch.is_empty() {
                writeln!(out, "{pad}}}").unwrap();
            } else {
                writeln!(out, "{pad}}} else {{").unwrap();
                write_block(out, else_branch, depth + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
        }
        Stmt::While { cond, body, .. } => {
            writeln!(out, "{pad}while ({}) {{", cond_to_string(cond)).unwrap();
            write_block(out, body, depth + 1);
            writeln!(out, "{pad}}}").unwrap();
        }
    }
}

/// Renders a program as source text that parses back to an equal AST.
pub fn pretty(p: &Program) -> String {
    let mut out = format!("var {};\n", p.vars.join(", "));
    write_block(&mut out, &p.body, 0);
    out
}
