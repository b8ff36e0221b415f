use std::collections::HashSet;

use num_bigint::BigInt;
use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: variable `{name}` declared twice")]
    DuplicateVar { name: String, line: usize, col: usize },
    #[error("{line}:{col}: undeclared variable `{name}`")]
    UndeclaredVar { name: String, line: usize, col: usize },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, col, .. }
            | ParseError::DuplicateVar { line, col, .. }
            | ParseError::UndeclaredVar { line, col, .. } => (*line, *col),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "var", "havoc", "assume", "assert", "if", "else", "while", "skip", "true", "false",
];

const PUNCT: &[&str] = &[
    ":=", "<=", ">=", "==", "!=", "&&", "||", "<", ">", "=", "!", "+", "-", "*", "/", "%", "(",
    ")", "{", "}", ";", ",",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Int(n) => format!("`{}`", n),
            Tok::Punct(p) => format!("`{}`", p),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(s), span));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Int(s.parse().expect("digits")), span));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len();
                out.push((Tok::Punct(p), span));
            }
            None => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{}`", c),
                })
            }
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    allow_primes: bool,
    declared: Option<HashSet<String>>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = self.span();
        Err(ParseError::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(format!("expected `{}`, found {}", p, self.peek().describe()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{}`, found {}", k, self.peek().describe()))
        }
    }

    /// A variable occurrence; checks declaration when parsing a program.
    fn ident(&mut self) -> PResult<String> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                if s.ends_with('\'') && !self.allow_primes {
                    return self.error(format!("primed name `{}` is not allowed in programs", s));
                }
                if let Some(decl) = &self.declared {
                    if !decl.contains(&s) {
                        return Err(ParseError::UndeclaredVar {
                            name: s,
                            line: span.line,
                            col: span.col,
                        });
                    }
                }
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected identifier, found {}", t.describe())),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        self.expect_kw("var")?;
        let mut vars: Vec<String> = Vec::new();
        loop {
            let span = self.span();
            let name = match self.peek().clone() {
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && !s.ends_with('\'') => {
                    self.bump();
                    s
                }
                t => return self.error(format!("expected variable name, found {}", t.describe())),
            };
            if vars.contains(&name) {
                return Err(ParseError::DuplicateVar {
                    name,
                    line: span.line,
                    col: span.col,
                });
            }
            vars.push(name);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        self.declared = Some(vars.iter().cloned().collect());
        let mut body = Vec::new();
        while *self.peek() != Tok::Eof {
            body.push(self.stmt()?);
        }
        Ok(Program { vars, body })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.error("unterminated block");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn cond(&mut self) -> PResult<Cond> {
        self.expect_punct("(")?;
        if self.is_punct("*") && matches!(self.peek_at(1), Tok::Punct(")")) {
            self.bump();
            self.bump();
            return Ok(Cond::Nondet);
        }
        let b = self.bexpr()?;
        self.expect_punct(")")?;
        Ok(Cond::Expr(b))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        if self.is_kw("skip") {
            self.bump();
            self.eat_punct(";");
            return Ok(Stmt::Skip);
        }
        if self.is_kw("havoc") {
            self.bump();
            let v = self.ident()?;
            self.expect_punct(";")?;
            return Ok(Stmt::Havoc(v));
        }
        if self.is_kw("assume") || self.is_kw("assert") {
            let is_assert = self.is_kw("assert");
            self.bump();
            self.expect_punct("(")?;
            let cond = self.bexpr()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            return Ok(if is_assert {
                Stmt::Assert { cond, span }
            } else {
                Stmt::Assume(cond)
            });
        }
        if self.is_kw("if") {
            self.bump();
            let cond = self.cond()?;
            let then_branch = self.block()?;
            let else_branch = if self.is_kw("else") {
                self.bump();
                if self.is_kw("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else {
                Vec::new()
            };
            return Ok(Stmt::If {
                cond,
                then_branch,
                else_branch,
            });
        }
        if self.is_kw("while") {
            self.bump();
            let cond = self.cond()?;
            let body = self.block()?;
            return Ok(Stmt::While { cond, body, span });
        }
        if matches!(self.peek(), Tok::Ident(_)) {
            let var = self.ident()?;
            self.expect_punct(":=")?;
            let expr = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt::Assign { var, expr });
        }
        self.error(format!("expected statement, found {}", self.peek().describe()))
    }

    fn bexpr(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.band()?;
        while self.eat_punct("||") {
            let rhs = self.band()?;
            lhs = BoolExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn band(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.bnot()?;
        while self.eat_punct("&&") {
            let rhs = self.bnot()?;
            lhs = BoolExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn bnot(&mut self) -> PResult<BoolExpr> {
        if self.eat_punct("!") {
            return Ok(BoolExpr::not(self.bnot()?));
        }
        self.batom()
    }

    fn batom(&mut self) -> PResult<BoolExpr> {
        if self.is_kw("true") {
            self.bump();
            return Ok(BoolExpr::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(BoolExpr::False);
        }
        if self.is_punct("(") {
            // Either a parenthesized boolean or the start of an arithmetic operand.
            let save = self.pos;
            self.bump();
            if let Ok(b) = self.bexpr() {
                if self.eat_punct(")") && !self.at_cmp_or_arith() {
                    return Ok(b);
                }
            }
            self.pos = save;
        }
        self.comparison()
    }

    fn at_cmp_or_arith(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Punct("<" | "<=" | ">" | ">=" | "=" | "==" | "!=" | "+" | "-" | "*" | "/" | "%")
        )
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Punct("<") => Some(CmpOp::Lt),
            Tok::Punct("<=") => Some(CmpOp::Le),
            Tok::Punct(">") => Some(CmpOp::Gt),
            Tok::Punct(">=") => Some(CmpOp::Ge),
            Tok::Punct("=" | "==") => Some(CmpOp::Eq),
            Tok::Punct("!=") => Some(CmpOp::Ne),
            _ => None,
        }
    }

    /// `e0 ⋈ e1 ⋈ e2 ...`, chained comparisons desugar to a conjunction.
    fn comparison(&mut self) -> PResult<BoolExpr> {
        let first = self.expr()?;
        let Some(op) = self.cmp_op() else {
            return self.error(format!("expected comparison, found {}", self.peek().describe()));
        };
        self.bump();
        let mut prev = self.expr()?;
        let mut out = BoolExpr::Cmp(op, first, prev.clone());
        while let Some(op) = self.cmp_op() {
            self.bump();
            let next = self.expr()?;
            out = BoolExpr::and(out, BoolExpr::Cmp(op, prev, next.clone()));
            prev = next;
        }
        Ok(out)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_punct("+") {
                BinOp::Add
            } else if self.is_punct("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.is_punct("*") {
                BinOp::Mul
            } else if self.is_punct("/") {
                BinOp::Div
            } else if self.is_punct("%") {
                BinOp::Mod
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_punct("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            t => self.error(format!("expected expression, found {}", t.describe())),
        }
    }
}

/// Parses a program in the surface language.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
        allow_primes: false,
        declared: None,
    };
    p.program()
}

/// Parses a boolean expression over arbitrary (possibly primed) names.
pub fn parse_bool_expr(source: &str) -> Result<BoolExpr, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
        allow_primes: true,
        declared: None,
    };
    let b = p.bexpr()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", p.peek().describe()));
    }
    Ok(b)
}

/// Parses an arithmetic expression over arbitrary (possibly primed) names.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
        allow_primes: true,
        declared: None,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", p.peek().describe()));
    }
    Ok(e)
}
