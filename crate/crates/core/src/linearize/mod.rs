//! Linear over-approximation of non-linear formulas: non-linear subterms are
//! named by fresh temporaries, then equalities between temporaries and
//! interval bounds on them are recovered with the solver.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::formula::{Formula, Node, Symbol, Term};
use crate::polyhedra::affine_hull_with;
use crate::smt::{Interval, SolverError, SolverSession};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NonlinearOp {
    Mul,
    Div,
    Mod,
}

impl NonlinearOp {
    fn fun_name(self) -> &'static str {
        match self {
            NonlinearOp::Mul => "lin.mul",
            NonlinearOp::Div => "lin.div",
            NonlinearOp::Mod => "lin.mod",
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            NonlinearOp::Mul => "*",
            NonlinearOp::Div => "/",
            NonlinearOp::Mod => "%",
        }
    }
}

/// `gamma = lhs op rhs` with linear operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonlinearDef {
    pub gamma: Symbol,
    pub op: NonlinearOp,
    pub lhs: Term,
    pub rhs: Term,
}

impl NonlinearDef {
    /// The definition as a (non-linear) formula.
    pub fn to_formula(&self) -> Formula {
        let value = match self.op {
            NonlinearOp::Mul => self.lhs.mul(&self.rhs),
            NonlinearOp::Div => Term::div(&self.lhs, &self.rhs),
            NonlinearOp::Mod => Term::modulo(&self.lhs, &self.rhs),
        };
        Formula::eq(Term::sym(self.gamma.clone()), value)
    }
}

impl fmt::Display for NonlinearDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = ({}) {} ({})", self.gamma, self.lhs, self.op.symbol(), self.rhs)
    }
}

/// Output of [`normalize`].
#[derive(Clone, Debug)]
pub struct Normalized {
    /// `phi` with every non-linear subterm replaced by its temporary, conjoined
    /// with the exact linear encodings of division by constants.
    pub linear_part: Formula,
    pub defs: Vec<NonlinearDef>,
    /// Every introduced symbol mapped to the original subterm it names.
    pub witness: BTreeMap<Symbol, Term>,
}

#[derive(Default)]
struct Normalizer {
    defs: Vec<NonlinearDef>,
    memo: HashMap<(NonlinearOp, Term, Term), Symbol>,
    /// quotient and remainder symbols for division by a constant
    const_div: HashMap<(Term, Rational), (Symbol, Symbol)>,
    side: Vec<Formula>,
    zero_div: HashMap<(NonlinearOp, Term), Symbol>,
    witness: BTreeMap<Symbol, Term>,
}

impl Normalizer {
    fn expand(&self, t: &Term) -> Term {
        t.substitute(&|s: &Symbol| self.witness.get(s).cloned())
    }

    fn original(&self, op: NonlinearOp, a: &Term, b: &Term) -> Term {
        let (a, b) = (self.expand(a), self.expand(b));
        match op {
            NonlinearOp::Mul => a.mul(&b),
            NonlinearOp::Div => Term::div(&a, &b),
            NonlinearOp::Mod => Term::modulo(&a, &b),
        }
    }

    fn term(&mut self, t: &Term) -> Term {
        let mut out = Term::constant(t.constant_part().clone());
        for (n, c) in t.nodes() {
            out = out + self.node(n).scale(c);
        }
        out
    }

    fn node(&mut self, n: &Node) -> Term {
        match n {
            Node::Sym(s) => Term::sym(s.clone()),
            Node::Mul(fs) => {
                let mut acc = self.node(&fs[0]);
                for f in &fs[1..] {
                    let g = self.node(f);
                    acc = self.define(NonlinearOp::Mul, acc, g);
                }
                acc
            }
            Node::Div(a, b) => {
                let (a, b) = (self.term(a), self.term(b));
                self.define(NonlinearOp::Div, a, b)
            }
            Node::Mod(a, b) => {
                let (a, b) = (self.term(a), self.term(b));
                self.define(NonlinearOp::Mod, a, b)
            }
        }
    }

    fn define(&mut self, op: NonlinearOp, a: Term, b: Term) -> Term {
        if op == NonlinearOp::Mul && (a.is_constant() || b.is_constant()) {
            return a.mul(&b);
        }
        if op != NonlinearOp::Mul {
            if let Some(c) = b.as_constant() {
                if c.is_zero() {
                    // left unconstrained, as in SMT-LIB
                    if let Some(g) = self.zero_div.get(&(op, a.clone())) {
                        return Term::sym(g.clone());
                    }
                    let g = Symbol::fresh("g");
                    self.witness.insert(g.clone(), self.original(op, &a, &b));
                    self.zero_div.insert((op, a), g.clone());
                    return Term::sym(g);
                }
                if c.is_integer() {
                    let (q, r) = self.divide_by_constant(a, c.clone());
                    return Term::sym(if op == NonlinearOp::Div { q } else { r });
                }
            }
        }
        if let Some(g) = self.memo.get(&(op, a.clone(), b.clone())) {
            return Term::sym(g.clone());
        }
        let gamma = Symbol::fresh("g");
        self.witness.insert(gamma.clone(), self.original(op, &a, &b));
        self.memo.insert((op, a.clone(), b.clone()), gamma.clone());
        self.defs.push(NonlinearDef {
            gamma: gamma.clone(),
            op,
            lhs: a,
            rhs: b,
        });
        Term::sym(gamma)
    }

    /// `a = c·q + r ∧ 0 ≤ r < |c|` (Euclidean division).
    fn divide_by_constant(&mut self, a: Term, c: Rational) -> (Symbol, Symbol) {
        if let Some(qr) = self.const_div.get(&(a.clone(), c.clone())) {
            return qr.clone();
        }
        let q = Symbol::fresh("q");
        let r = Symbol::fresh("r");
        let c_term = Term::constant(c.clone());
        self.witness.insert(q.clone(), self.original(NonlinearOp::Div, &a, &c_term));
        self.witness.insert(r.clone(), self.original(NonlinearOp::Mod, &a, &c_term));
        let (tq, tr) = (Term::sym(q.clone()), Term::sym(r.clone()));
        self.side.push(Formula::eq(a.clone(), tq.scale(&c) + tr.clone()));
        self.side.push(Formula::le(Term::zero(), tr.clone()));
        self.side.push(Formula::lt(tr, Term::constant(c.abs())));
        self.const_div.insert((a, c), (q.clone(), r.clone()));
        (q, r)
    }
}

/// Splits `phi` into a linear formula and definitions of the temporaries it
/// uses; `phi` is equivalent to `∃γ. linear_part ∧ ⋀ defs`. Occurrences of
/// the same subterm share one temporary.
pub fn normalize(phi: &Formula) -> Normalized {
    let mut n = Normalizer::default();
    let linear = phi.map_atoms(&mut |a| {
        let t = n.term(a.term());
        Formula::atom(t, a.rel())
    });
    let mut parts = vec![linear];
    parts.append(&mut n.side);
    Normalized {
        linear_part: Formula::and(parts),
        defs: n.defs,
        witness: n.witness,
    }
}

/// Equations over the state and temporary symbols implied by the linear part
/// when each definition is read as an uninterpreted function application.
pub fn infer_equalities(session: &mut SolverSession, norm: &Normalized) -> Result<Vec<Formula>, SolverError> {
    if norm.defs.is_empty() {
        return Ok(Vec::new());
    }
    let mut syms: BTreeSet<Symbol> = norm.linear_part.symbols();
    for d in &norm.defs {
        syms.insert(d.gamma.clone());
        syms.extend(d.lhs.symbols());
        syms.extend(d.rhs.symbols());
    }
    let syms: Vec<Symbol> = syms.into_iter().collect();
    let declared = syms.clone();
    let hull = affine_hull_with(session, &norm.linear_part, &syms, |s| {
        for x in &declared {
            s.declare(x)?;
        }
        for op in [NonlinearOp::Mul, NonlinearOp::Div, NonlinearOp::Mod] {
            s.declare_fun(op.fun_name(), 2)?;
        }
        for d in &norm.defs {
            s.assert_raw(&format!(
                "(= {} (|{}| {} {}))",
                d.gamma.smt_name(),
                d.op.fun_name(),
                d.lhs.to_smt(),
                d.rhs.to_smt()
            ))?;
        }
        Ok(())
    })?;
    if hull.hull.is_bottom() {
        return Ok(vec![Formula::False]);
    }
    let gammas: BTreeSet<&Symbol> = norm.defs.iter().map(|d| &d.gamma).collect();
    Ok(hull
        .hull
        .equations()
        .into_iter()
        .map(|(a, b)| hull.hull.equation_formula(&a, &b))
        .filter(|f| f.symbols().iter().any(|s| gammas.contains(s)))
        .collect())
}

/// Extended-real bound.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Ext {
    NegInf,
    Fin(Rational),
    PosInf,
}

impl Ext {
    fn mul(&self, o: &Ext) -> Ext {
        let sign = |e: &Ext| match e {
            Ext::NegInf => -1,
            Ext::PosInf => 1,
            Ext::Fin(q) if q.is_zero() => 0,
            Ext::Fin(q) if q.is_positive() => 1,
            Ext::Fin(_) => -1,
        };
        match (self, o) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a * b),
            _ => match sign(self) * sign(o) {
                0 => Ext::Fin(Rational::zero()),
                1 => Ext::PosInf,
                _ => Ext::NegInf,
            },
        }
    }
}

fn ext_bounds(i: &Interval) -> (Ext, Ext) {
    (
        i.lo.clone().map_or(Ext::NegInf, Ext::Fin),
        i.hi.clone().map_or(Ext::PosInf, Ext::Fin),
    )
}

/// Interval product: the hull of the four endpoint products.
pub fn interval_mul(a: &Interval, b: &Interval) -> Interval {
    let (a0, a1) = ext_bounds(a);
    let (b0, b1) = ext_bounds(b);
    let ps = [a0.mul(&b0), a0.mul(&b1), a1.mul(&b0), a1.mul(&b1)];
    let lo = ps.iter().min().unwrap();
    let hi = ps.iter().max().unwrap();
    Interval {
        lo: match lo {
            Ext::Fin(q) => Some(q.clone()),
            _ => None,
        },
        hi: match hi {
            Ext::Fin(q) => Some(q.clone()),
            _ => None,
        },
    }
}

fn nonneg(i: &Interval) -> bool {
    i.lo.as_ref().is_some_and(|l| !l.is_negative())
}

fn nonpos(i: &Interval) -> bool {
    i.hi.as_ref().is_some_and(|h| !h.is_positive())
}

fn positive(i: &Interval) -> bool {
    i.lo.as_ref().is_some_and(|l| l.is_positive())
}

fn negative(i: &Interval) -> bool {
    i.hi.as_ref().is_some_and(|h| h.is_negative())
}

fn bound_atoms(g: &Term, i: &Interval, out: &mut Vec<Formula>) {
    if let Some(l) = &i.lo {
        out.push(Formula::le(Term::constant(l.clone()), g.clone()));
    }
    if let Some(h) = &i.hi {
        out.push(Formula::le(g.clone(), Term::constant(h.clone())));
    }
}

/// `g = s·t` where `s ∈ cs` is bounded by constants and `t` is kept
/// symbolic. The direction of each bound depends on the sign of `t`.
fn symbolic_bounds(g: &Term, cs: &Interval, t: &Term, ts: &Interval, out: &mut Vec<Formula>) {
    let scaled = |c: &Rational| t.scale(c);
    if nonneg(ts) {
        if let Some(l) = &cs.lo {
            out.push(Formula::le(scaled(l), g.clone()));
        }
        if let Some(h) = &cs.hi {
            out.push(Formula::le(g.clone(), scaled(h)));
        }
    } else if nonpos(ts) {
        if let Some(h) = &cs.hi {
            out.push(Formula::le(scaled(h), g.clone()));
        }
        if let Some(l) = &cs.lo {
            out.push(Formula::le(g.clone(), scaled(l)));
        }
    }
}

/// Concrete and symbolic bounds on every temporary. Definitions are
/// processed in order, each one seeing the bounds found for earlier ones.
pub fn strengthen_intervals(
    session: &mut SolverSession,
    context: &Formula,
    defs: &[NonlinearDef],
) -> Result<Vec<Formula>, SolverError> {
    let mut out = Vec::new();
    for d in defs {
        let ctx = Formula::and(std::iter::once(context.clone()).chain(out.iter().cloned()).collect());
        let bound = |session: &mut SolverSession, t: &Term| -> Result<Interval, SolverError> {
            Ok(session.optimize_bounds(&ctx, t)?.unwrap_or_else(Interval::top))
        };
        let s = bound(session, &d.lhs)?;
        let t = bound(session, &d.rhs)?;
        let g = Term::sym(d.gamma.clone());
        match d.op {
            NonlinearOp::Mul => {
                bound_atoms(&g, &interval_mul(&s, &t), &mut out);
                symbolic_bounds(&g, &s, &d.rhs, &t, &mut out);
                symbolic_bounds(&g, &t, &d.lhs, &s, &mut out);
            }
            NonlinearOp::Mod => {
                // 0 <= a mod b < |b| whenever b != 0
                if positive(&t) {
                    out.push(Formula::le(Term::zero(), g.clone()));
                    out.push(Formula::lt(g.clone(), d.rhs.clone()));
                } else if negative(&t) {
                    out.push(Formula::le(Term::zero(), g.clone()));
                    out.push(Formula::lt(g.clone(), -d.rhs.clone()));
                }
                if nonneg(&s) && (positive(&t) || negative(&t)) {
                    out.push(Formula::le(g.clone(), d.lhs.clone()));
                }
            }
            NonlinearOp::Div => {
                // for b >= 1 the quotient lies between 0 and a
                if t.lo.as_ref().is_some_and(|l| *l >= Rational::one()) {
                    if nonneg(&s) {
                        out.push(Formula::le(Term::zero(), g.clone()));
                        out.push(Formula::le(g.clone(), d.lhs.clone()));
                    } else if nonpos(&s) {
                        out.push(Formula::le(d.lhs.clone(), g.clone()));
                        out.push(Formula::le(g.clone(), Term::zero()));
                    }
                }
            }
        }
    }
    Ok(out
        .into_iter()
        .filter(|f| !matches!(f, Formula::True))
        .collect())
}

/// Which strengthening steps [`lin_with`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearizeConfig {
    pub equalities: bool,
    pub intervals: bool,
}

impl Default for LinearizeConfig {
    fn default() -> Self {
        LinearizeConfig {
            equalities: true,
            intervals: true,
        }
    }
}

/// A linear formula implied by the input, over the input's symbols plus
/// fresh temporaries.
#[derive(Clone, Debug)]
pub struct Linearized {
    pub formula: Formula,
    /// Original subterm named by each temporary; substituting it back gives
    /// a formula entailed by the input.
    pub witness: BTreeMap<Symbol, Term>,
}

impl Linearized {
    /// The formula with temporaries replaced by the subterms they name.
    pub fn instantiated(&self) -> Formula {
        self.formula.substitute(&|s: &Symbol| self.witness.get(s).cloned())
    }
}

/// Linear formula implied by `phi`, with temporaries left as free auxiliary
/// symbols.
pub fn lin(session: &mut SolverSession, phi: &Formula) -> Result<Linearized, SolverError> {
    lin_with(session, phi, LinearizeConfig::default())
}

pub fn lin_with(session: &mut SolverSession, phi: &Formula, cfg: LinearizeConfig) -> Result<Linearized, SolverError> {
    if phi.is_linear() {
        return Ok(Linearized {
            formula: phi.clone(),
            witness: BTreeMap::new(),
        });
    }
    let norm = normalize(phi);
    if session.get_model(&norm.linear_part)?.is_none() {
        return Ok(Linearized {
            formula: Formula::False,
            witness: norm.witness,
        });
    }
    let mut parts = vec![norm.linear_part.clone()];
    if cfg.equalities {
        match infer_equalities(session, &norm) {
            Ok(eqs) => parts.extend(eqs),
            Err(SolverError::Timeout) | Err(SolverError::Unknown(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if cfg.intervals {
        let ctx = Formula::and(parts.clone());
        match strengthen_intervals(session, &ctx, &norm.defs) {
            Ok(atoms) => parts.extend(atoms),
            Err(SolverError::Timeout) | Err(SolverError::Unknown(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Linearized {
        formula: Formula::and(parts),
        witness: norm.witness,
    })
}
