use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::symbol::Symbol;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("symbol `{0}` has no value")]
    Unassigned(Symbol),
    #[error("integer division applied to a non-integer value")]
    NonInteger,
}

/// A non-constant summand of a [`Term`].
///
/// `Mul` holds at least two factors, sorted, none of them a `Mul`; this keeps
/// syntactically equal monomials equal as values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Sym(Symbol),
    Mul(Vec<Node>),
    Div(Box<Term>, Box<Term>),
    Mod(Box<Term>, Box<Term>),
}

/// Rational-coefficient linear combination of nodes plus a constant.
///
/// Zero coefficients are never stored, so a term is linear iff every node is
/// a plain symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    coeffs: BTreeMap<Node, Rational>,
    constant: Rational,
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Euclidean quotient and remainder (`0 <= r < |b|`), matching SMT-LIB `div`/`mod`.
pub fn euclid_div_mod(a: &BigInt, b: &BigInt) -> Option<(BigInt, BigInt)> {
    if b.is_zero() {
        return None;
    }
    let q = if b.is_positive() {
        a.div_floor(b)
    } else {
        -(a.div_floor(&-b))
    };
    let r = a - b * &q;
    Some((q, r))
}

impl Node {
    fn factors(&self) -> Vec<Node> {
        match self {
            Node::Mul(fs) => fs.clone(),
            n => vec![n.clone()],
        }
    }

    fn product(a: &Node, b: &Node) -> Node {
        let mut fs = a.factors();
        fs.extend(b.factors());
        fs.sort();
        Node::Mul(fs)
    }

    pub fn is_sym(&self) -> bool {
        matches!(self, Node::Sym(_))
    }

    pub fn symbols_into(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Mul(fs) => fs.iter().for_each(|f| f.symbols_into(out)),
            Node::Div(a, b) | Node::Mod(a, b) => {
                a.symbols_into(out);
                b.symbols_into(out);
            }
        }
    }

    /// The node as a term, with substitution applied.
    pub fn substitute<F>(&self, f: &F) -> Term
    where
        F: Fn(&Symbol) -> Option<Term>,
    {
        match self {
            Node::Sym(s) => f(s).unwrap_or_else(|| Term::sym(s.clone())),
            Node::Mul(fs) => fs
                .iter()
                .fold(Term::one(), |acc, n| acc.mul(&n.substitute(f))),
            Node::Div(a, b) => Term::div(&a.substitute(f), &b.substitute(f)),
            Node::Mod(a, b) => Term::modulo(&a.substitute(f), &b.substitute(f)),
        }
    }

    pub fn eval<F>(&self, lookup: &F) -> Result<Rational, EvalError>
    where
        F: Fn(&Symbol) -> Option<Rational>,
    {
        match self {
            Node::Sym(s) => lookup(s).ok_or_else(|| EvalError::Unassigned(s.clone())),
            Node::Mul(fs) => {
                let mut acc = Rational::one();
                for n in fs {
                    acc *= n.eval(lookup)?;
                }
                Ok(acc)
            }
            Node::Div(a, b) | Node::Mod(a, b) => {
                let (x, y) = (a.eval(lookup)?, b.eval(lookup)?);
                if !x.is_integer() || !y.is_integer() {
                    return Err(EvalError::NonInteger);
                }
                let (q, r) = euclid_div_mod(x.numer(), y.numer()).ok_or(EvalError::DivisionByZero)?;
                Ok(Rational::from_integer(if matches!(self, Node::Div(..)) { q } else { r }))
            }
        }
    }

    pub fn to_smt(&self) -> String {
        match self {
            Node::Sym(s) => s.smt_name(),
            Node::Mul(fs) => {
                let parts: Vec<String> = fs.iter().map(|n| n.to_smt()).collect();
                format!("(* {})", parts.join(" "))
            }
            Node::Div(a, b) => format!("(div {} {})", a.to_smt(), b.to_smt()),
            Node::Mod(a, b) => format!("(mod {} {})", a.to_smt(), b.to_smt()),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Sym(s) => write!(f, "{}", s),
            Node::Mul(fs) => {
                for (i, n) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{}", n)?;
                }
                Ok(())
            }
            Node::Div(a, b) => write!(f, "(({}) / ({}))", a, b),
            Node::Mod(a, b) => write!(f, "(({}) % ({}))", a, b),
        }
    }
}

pub fn rational_to_smt(q: &Rational) -> String {
    let int = |n: &BigInt| {
        if n.is_negative() {
            format!("(- {})", -n)
        } else {
            n.to_string()
        }
    };
    if q.is_integer() {
        int(q.numer())
    } else {
        format!("(/ {} {})", int(q.numer()), q.denom())
    }
}

impl Default for Term {
    fn default() -> Self {
        Term::zero()
    }
}

impl Term {
    pub fn zero() -> Term {
        Term {
            coeffs: BTreeMap::new(),
            constant: Rational::zero(),
        }
    }

    pub fn one() -> Term {
        Term::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Term {
        Term {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn int(n: i64) -> Term {
        Term::constant(rat(n))
    }

    pub fn sym(s: Symbol) -> Term {
        Term::node(Node::Sym(s))
    }

    pub fn node(n: Node) -> Term {
        let mut t = Term::zero();
        t.coeffs.insert(n, Rational::one());
        t
    }

    /// Builds `Σ c_i·s_i + constant`.
    pub fn linear<I>(coeffs: I, constant: Rational) -> Term
    where
        I: IntoIterator<Item = (Symbol, Rational)>,
    {
        let mut t = Term::constant(constant);
        for (s, c) in coeffs {
            t.add_node(Node::Sym(s), c);
        }
        t
    }

    fn add_node(&mut self, n: Node, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(n);
        use std::collections::btree_map::Entry;
        match entry {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&Node, &Rational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        self.is_constant().then_some(&self.constant)
    }

    pub fn is_linear(&self) -> bool {
        self.coeffs.keys().all(Node::is_sym)
    }

    /// Coefficient of a plain symbol summand.
    pub fn coeff(&self, s: &Symbol) -> Rational {
        self.coeffs
            .get(&Node::Sym(s.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Linear view: symbol coefficients and constant; `None` if non-linear.
    pub fn linear_parts(&self) -> Option<(BTreeMap<Symbol, Rational>, Rational)> {
        let mut out = BTreeMap::new();
        for (n, c) in &self.coeffs {
            match n {
                Node::Sym(s) => {
                    out.insert(s.clone(), c.clone());
                }
                _ => return None,
            }
        }
        Some((out, self.constant.clone()))
    }

    pub fn scale(&self, k: &Rational) -> Term {
        if k.is_zero() {
            return Term::zero();
        }
        Term {
            coeffs: self.coeffs.iter().map(|(n, c)| (n.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Product, distributed over sums. Non-constant products become
    /// `Node::Mul` monomials.
    pub fn mul(&self, other: &Term) -> Term {
        if let Some(c) = self.as_constant() {
            return other.scale(c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(c);
        }
        let mut out = Term::constant(&self.constant * &other.constant);
        for (n, c) in &self.coeffs {
            out.add_node(n.clone(), c * &other.constant);
        }
        for (n, c) in &other.coeffs {
            out.add_node(n.clone(), c * &self.constant);
        }
        for (n1, c1) in &self.coeffs {
            for (n2, c2) in &other.coeffs {
                out.add_node(Node::product(n1, n2), c1 * c2);
            }
        }
        out
    }

    /// Integer (Euclidean) division; folded when both sides are integer constants.
    pub fn div(a: &Term, b: &Term) -> Term {
        Term::int_op(a, b, true)
    }

    /// Euclidean remainder; folded when both sides are integer constants.
    pub fn modulo(a: &Term, b: &Term) -> Term {
        Term::int_op(a, b, false)
    }

    fn int_op(a: &Term, b: &Term, quotient: bool) -> Term {
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            if x.is_integer() && y.is_integer() {
                if let Some((q, r)) = euclid_div_mod(x.numer(), y.numer()) {
                    return Term::constant(Rational::from_integer(if quotient { q } else { r }));
                }
            }
        }
        let (a, b) = (Box::new(a.clone()), Box::new(b.clone()));
        Term::node(if quotient { Node::Div(a, b) } else { Node::Mod(a, b) })
    }

    pub fn symbols_into(&self, out: &mut BTreeSet<Symbol>) {
        for n in self.coeffs.keys() {
            n.symbols_into(out);
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.symbols_into(&mut out);
        out
    }

    /// Simultaneous substitution of symbols by terms.
    pub fn substitute<F>(&self, f: &F) -> Term
    where
        F: Fn(&Symbol) -> Option<Term>,
    {
        let mut out = Term::constant(self.constant.clone());
        for (n, c) in &self.coeffs {
            out = out + n.substitute(f).scale(c);
        }
        out
    }

    pub fn eval<F>(&self, lookup: &F) -> Result<Rational, EvalError>
    where
        F: Fn(&Symbol) -> Option<Rational>,
    {
        let mut acc = self.constant.clone();
        for (n, c) in &self.coeffs {
            acc += c * n.eval(lookup)?;
        }
        Ok(acc)
    }

    /// Non-linear nodes appearing anywhere in the term (outermost first).
    pub fn nonlinear_nodes(&self) -> Vec<&Node> {
        self.coeffs.keys().filter(|n| !n.is_sym()).collect()
    }

    pub fn to_smt(&self) -> String {
        let mut parts = Vec::new();
        for (n, c) in &self.coeffs {
            if c.is_one() {
                parts.push(n.to_smt());
            } else {
                parts.push(format!("(* {} {})", rational_to_smt(c), n.to_smt()));
            }
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(rational_to_smt(&self.constant));
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("(+ {})", parts.join(" "))
        }
    }

    /// Least common multiple of coefficient denominators (constant included).
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs
            .values()
            .chain(std::iter::once(&self.constant))
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Gcd of numerators of all coefficients (constant included); zero for the zero term.
    pub fn numerator_gcd(&self) -> BigInt {
        self.coeffs
            .values()
            .chain(std::iter::once(&self.constant))
            .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
    }

    /// Coefficient of the first node in canonical order.
    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.values().next()
    }

    fn fmt_signed(&self, f: &mut fmt::Formatter<'_>, negate: bool) -> fmt::Result {
        let mut first = true;
        let sign = |c: &Rational| if negate { -c.clone() } else { c.clone() };
        for (n, c) in &self.coeffs {
            let c = sign(c);
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if mag.is_one() {
                write!(f, "{}", n)?;
            } else if mag.is_integer() {
                write!(f, "{}*{}", mag, n)?;
            } else {
                write!(f, "({})*{}", mag, n)?;
            }
            first = false;
        }
        let k = sign(&self.constant);
        if first {
            if k.is_integer() {
                write!(f, "{}", k)?;
            } else {
                write!(f, "({})", k)?;
            }
        } else if !k.is_zero() {
            let mag = k.abs();
            f.write_str(if k.is_negative() { " - " } else { " + " })?;
            if mag.is_integer() {
                write!(f, "{}", mag)?;
            } else {
                write!(f, "({})", mag)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_signed(f, false)
    }
}

/// Writes `lhs <op> rhs` for the relation `t <op> 0`, moving negative
/// summands to the right-hand side.
pub(crate) fn fmt_relation(t: &Term, op: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut lhs = Term::zero();
    let mut rhs = Term::zero();
    for (n, c) in &t.coeffs {
        if c.is_positive() {
            lhs.add_node(n.clone(), c.clone());
        } else {
            rhs.add_node(n.clone(), -c.clone());
        }
    }
    rhs.constant = -t.constant.clone();
    if lhs.is_zero() && !rhs.is_constant() {
        // Everything moved right; flip so the variables stay on the left.
        let flipped = match op {
            "<" => ">",
            "<=" => ">=",
            o => o,
        };
        let lhs2 = Term { coeffs: rhs.coeffs, constant: Rational::zero() };
        let rhs2 = Term::constant(-rhs.constant);
        return write!(f, "{} {} {}", lhs2, flipped, rhs2);
    }
    write!(f, "{} {} {}", lhs, op, rhs)
}

impl Add for Term {
    type Output = Term;
    fn add(mut self, rhs: Term) -> Term {
        self.constant += rhs.constant;
        for (n, c) in rhs.coeffs {
            self.add_node(n, c);
        }
        self
    }
}

impl<'a> Add<&'a Term> for &'a Term {
    type Output = Term;
    fn add(self, rhs: &Term) -> Term {
        self.clone() + rhs.clone()
    }
}

impl Neg for Term {
    type Output = Term;
    fn neg(self) -> Term {
        self.scale(&-Rational::one())
    }
}

impl Sub for Term {
    type Output = Term;
    fn sub(self, rhs: Term) -> Term {
        self + (-rhs)
    }
}

impl<'a> Sub<&'a Term> for &'a Term {
    type Output = Term;
    fn sub(self, rhs: &Term) -> Term {
        self.clone() - rhs.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Var;

    fn x() -> Term {
        Term::sym(Var::new("x").pre())
    }
    fn y() -> Term {
        Term::sym(Var::new("y").pre())
    }

    #[test]
    fn cancellation_drops_zero_coefficients() {
        let t = x() + y() - x();
        assert_eq!(t, y());
        assert!((x() - x()).is_zero());
    }

    #[test]
    fn product_is_distributed_and_canonical() {
        let a = (x() + Term::int(1)).mul(&y());
        let b = y().mul(&x()) + y();
        assert_eq!(a, b);
        assert!(!a.is_linear());
        assert_eq!(a.to_string(), "y + x*y");
    }

    #[test]
    fn constant_division_folds_euclidean() {
        assert_eq!(Term::div(&Term::int(-7), &Term::int(2)), Term::int(-4));
        assert_eq!(Term::modulo(&Term::int(-7), &Term::int(2)), Term::int(1));
        assert_eq!(Term::div(&Term::int(7), &Term::int(-2)), Term::int(-3));
        assert_eq!(Term::modulo(&Term::int(-7), &Term::int(-2)), Term::int(1));
        assert!(!Term::div(&x(), &Term::int(2)).is_constant());
    }

    #[test]
    fn eval_reports_division_by_zero() {
        let t = Term::div(&x(), &y());
        let lookup = |s: &Symbol| Some(if s.var().unwrap().name() == "x" { rat(3) } else { rat(0) });
        assert_eq!(t.eval(&lookup), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn smt_rendering() {
        let t = x().scale(&rat(-2)) + Term::int(3);
        assert_eq!(t.to_smt(), "(+ (* (- 2) |x|) 3)");
        assert_eq!(Term::zero().to_smt(), "0");
    }
}
