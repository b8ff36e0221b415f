use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::symbol::Symbol;
use super::term::{fmt_relation, EvalError, Term};
use crate::Rational;

/// Relation of an atom `t ⋈ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
}

impl Rel {
    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
        }
    }

    fn holds(self, v: &Rational) -> bool {
        match self {
            Rel::Lt => v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
        }
    }
}

/// Source-level comparison operators; desugared into [`Rel`] atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

/// Normalized atom `term ⋈ 0` with primitive integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    term: Term,
    rel: Rel,
}

impl Atom {
    /// Normalizes `t ⋈ 0`; returns `Err(b)` when `t` is constant and the atom is just `b`.
    pub fn new(t: Term, rel: Rel) -> Result<Atom, bool> {
        if let Some(c) = t.as_constant() {
            return Err(rel.holds(c));
        }
        let lcm = Rational::from_integer(t.denominator_lcm());
        let t = t.scale(&lcm);
        let g = Rational::from_integer(t.numerator_gcd());
        let mut t = t.scale(&(Rational::one() / g));
        if rel == Rel::Eq && t.leading_coeff().is_some_and(|c| c.is_negative()) {
            t = -t;
        }
        Ok(Atom { term: t, rel })
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn is_linear(&self) -> bool {
        self.term.is_linear()
    }

    pub fn eval<F>(&self, lookup: &F) -> Result<bool, EvalError>
    where
        F: Fn(&Symbol) -> Option<Rational>,
    {
        Ok(self.rel.holds(&self.term.eval(lookup)?))
    }

    /// Negation in negation normal form.
    pub fn negate(&self) -> Formula {
        let t = &self.term;
        match self.rel {
            Rel::Lt => Formula::atom(-t.clone(), Rel::Le),
            Rel::Le => Formula::atom(-t.clone(), Rel::Lt),
            Rel::Eq => Formula::or(vec![
                Formula::atom(t.clone(), Rel::Lt),
                Formula::atom(-t.clone(), Rel::Lt),
            ]),
        }
    }

    pub fn to_smt(&self) -> String {
        let op = match self.rel {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
        };
        format!("({} {} 0)", op, self.term.to_smt())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Equalities read better with post-state symbols on the left.
        let post_negative = self.term.nodes().any(|(n, c)| {
            matches!(n, super::term::Node::Sym(s) if s.is_post()) && c.is_negative()
        });
        if self.rel == Rel::Eq && post_negative {
            return fmt_relation(&-self.term.clone(), "=", f);
        }
        fmt_relation(&self.term, self.rel.as_str(), f)
    }
}

/// Quantifier-free formula in negation normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(t: Term, rel: Rel) -> Formula {
        match Atom::new(t, rel) {
            Ok(a) => Formula::Atom(a),
            Err(true) => Formula::True,
            Err(false) => Formula::False,
        }
    }

    pub fn cmp(lhs: Term, op: CmpOp, rhs: Term) -> Formula {
        match op {
            CmpOp::Lt => Formula::atom(lhs - rhs, Rel::Lt),
            CmpOp::Le => Formula::atom(lhs - rhs, Rel::Le),
            CmpOp::Eq => Formula::atom(lhs - rhs, Rel::Eq),
            CmpOp::Gt => Formula::atom(rhs - lhs, Rel::Lt),
            CmpOp::Ge => Formula::atom(rhs - lhs, Rel::Le),
            CmpOp::Ne => Formula::or(vec![
                Formula::atom(lhs.clone() - rhs.clone(), Rel::Lt),
                Formula::atom(rhs - lhs, Rel::Lt),
            ]),
        }
    }

    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, CmpOp::Eq, rhs)
    }

    pub fn le(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, CmpOp::Le, rhs)
    }

    pub fn lt(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, CmpOp::Lt, rhs)
    }

    pub fn ge(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, CmpOp::Ge, rhs)
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(qs) => {
                    for q in qs {
                        if seen.insert(q.clone()) {
                            out.push(q);
                        }
                    }
                }
                p => {
                    if seen.insert(p.clone()) {
                        out.push(p);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(qs) => {
                    for q in qs {
                        if seen.insert(q.clone()) {
                            out.push(q);
                        }
                    }
                }
                p => {
                    if seen.insert(p.clone()) {
                        out.push(p);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a) => a.negate(),
            Formula::And(ps) => Formula::or(ps.iter().map(Formula::negate).collect()),
            Formula::Or(ps) => Formula::and(ps.iter().map(Formula::negate).collect()),
        }
    }

    pub fn implies(&self, other: &Formula) -> Formula {
        Formula::or(vec![self.negate(), other.clone()])
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(ps) => ps.iter().collect(),
            Formula::True => vec![],
            f => vec![f],
        }
    }

    /// Rebuilds the formula with every atom replaced by `f(atom)`.
    pub fn map_atoms<F>(&self, f: &mut F) -> Formula
    where
        F: FnMut(&Atom) -> Formula,
    {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => f(a),
            Formula::And(ps) => Formula::and(ps.iter().map(|p| p.map_atoms(f)).collect()),
            Formula::Or(ps) => Formula::or(ps.iter().map(|p| p.map_atoms(f)).collect()),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| p.collect_atoms(out)),
            _ => {}
        }
    }

    pub fn substitute<F>(&self, f: &F) -> Formula
    where
        F: Fn(&Symbol) -> Option<Term>,
    {
        self.map_atoms(&mut |a: &Atom| Formula::atom(a.term().substitute(f), a.rel()))
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            a.term().symbols_into(&mut out);
        }
        out
    }

    pub fn is_linear(&self) -> bool {
        self.atoms().iter().all(|a| a.is_linear())
    }

    pub fn eval<F>(&self, lookup: &F) -> Result<bool, EvalError>
    where
        F: Fn(&Symbol) -> Option<Rational>,
    {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(a) => a.eval(lookup),
            Formula::And(ps) => {
                for p in ps {
                    if !p.eval(lookup)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(ps) => {
                for p in ps {
                    if p.eval(lookup)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    pub fn to_smt(&self) -> String {
        match self {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Atom(a) => a.to_smt(),
            Formula::And(ps) => {
                let parts: Vec<String> = ps.iter().map(Formula::to_smt).collect();
                format!("(and {})", parts.join(" "))
            }
            Formula::Or(ps) => {
                let parts: Vec<String> = ps.iter().map(Formula::to_smt).collect();
                format!("(or {})", parts.join(" "))
            }
        }
    }

    /// Number of atom occurrences; a rough size measure.
    pub fn size(&self) -> usize {
        self.atoms().len()
    }
}

impl From<Atom> for Formula {
    fn from(a: Atom) -> Self {
        Formula::Atom(a)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{}", a),
            Formula::And(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" && ")?;
                    }
                    match p {
                        Formula::Or(_) => write!(f, "({})", p)?,
                        _ => write!(f, "{}", p)?,
                    }
                }
                Ok(())
            }
            Formula::Or(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" || ")?;
                    }
                    match p {
                        Formula::And(_) => write!(f, "({})", p)?,
                        _ => write!(f, "{}", p)?,
                    }
                }
                Ok(())
            }
        }
    }
}
