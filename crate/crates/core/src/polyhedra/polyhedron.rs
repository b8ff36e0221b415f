use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::lp::{feasible, maximize, maximize_at, LpOutcome, LpRel, LpRow};
use crate::formula::{Atom, Formula, Rel, Symbol, Term};
use crate::Rational;

/// Default cap on the number of constraints during projection.
pub const DEFAULT_BUDGET: usize = 512;

/// Largest system on which LP-based redundancy removal is attempted.
const LP_PRUNE_LIMIT: usize = 256;

/// Linear constraint `Σ a_x·x + c ≤ 0` (or `= 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    coeffs: BTreeMap<Symbol, Rational>,
    constant: Rational,
    eq: bool,
}

impl Constraint {
    /// Builds and normalizes a constraint; `Err(b)` if it is constant with truth value `b`.
    pub fn new(coeffs: BTreeMap<Symbol, Rational>, constant: Rational, eq: bool) -> Result<Self, bool> {
        let coeffs: BTreeMap<Symbol, Rational> = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if coeffs.is_empty() {
            return Err(if eq { constant.is_zero() } else { !constant.is_positive() });
        }
        let mut c = Constraint { coeffs, constant, eq };
        c.normalize();
        Ok(c)
    }

    /// From a linear atom over integer symbols; strict atoms are tightened.
    pub fn from_atom(a: &Atom) -> Result<Self, bool> {
        let (coeffs, constant) = a.term().linear_parts().expect("linear atom");
        match a.rel() {
            Rel::Le => Constraint::new(coeffs, constant, false),
            Rel::Eq => Constraint::new(coeffs, constant, true),
            // atoms carry primitive integer coefficients: t < 0 ⇔ t + 1 ≤ 0
            Rel::Lt => Constraint::new(coeffs, constant + Rational::one(), false),
        }
    }

    fn normalize(&mut self) {
        // coefficients become coprime integers; the constant may stay fractional
        let mut l = BigInt::one();
        for c in self.coeffs.values() {
            l = l.lcm(c.denom());
        }
        let lr = Rational::from_integer(l);
        let mut g = BigInt::zero();
        for c in self.coeffs.values() {
            g = g.gcd(&(c * &lr).to_integer());
        }
        let mut k = lr / Rational::from_integer(g);
        if self.eq && self.coeffs.values().next().is_some_and(|c| c.is_negative()) {
            k = -k;
        }
        if !k.is_one() {
            for c in self.coeffs.values_mut() {
                *c *= &k;
            }
            self.constant *= &k;
        }
    }

    pub fn coeff(&self, s: &Symbol) -> Rational {
        self.coeffs.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<Symbol, Rational> {
        &self.coeffs
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn is_eq(&self) -> bool {
        self.eq
    }

    pub fn mentions(&self, s: &Symbol) -> bool {
        self.coeffs.contains_key(s)
    }

    pub fn term(&self) -> Term {
        Term::linear(self.coeffs.clone(), self.constant.clone())
    }

    pub fn to_formula(&self) -> Formula {
        Formula::atom(self.term(), if self.eq { Rel::Eq } else { Rel::Le })
    }

    /// `a·self + b·other` as a raw (coeffs, constant) pair.
    fn combine(&self, a: &Rational, other: &Constraint, b: &Rational) -> (BTreeMap<Symbol, Rational>, Rational) {
        let mut coeffs: BTreeMap<Symbol, Rational> = self.coeffs.iter().map(|(s, c)| (s.clone(), c * a)).collect();
        for (s, c) in &other.coeffs {
            *coeffs.entry(s.clone()).or_insert_with(Rational::zero) += c * b;
        }
        (coeffs, &self.constant * a + &other.constant * b)
    }

    fn substitute(&self, s: &Symbol, def: &(BTreeMap<Symbol, Rational>, Rational)) -> Result<Constraint, bool> {
        let Some(a) = self.coeffs.get(s) else {
            return Ok(self.clone());
        };
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(s);
        for (t, c) in &def.0 {
            *coeffs.entry(t.clone()).or_insert_with(Rational::zero) += a * c;
        }
        Constraint::new(coeffs, &self.constant + a * &def.1, self.eq)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Convex polyhedron over integer-valued symbols, as a conjunction of
/// linear constraints; `⊥` is the empty polyhedron.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    constraints: Vec<Constraint>,
    bottom: bool,
}

/// Statistics and degradation flags from a projection.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProjectStats {
    pub peak_constraints: usize,
    pub interval_fallback: bool,
}

impl Polyhedron {
    pub fn top() -> Self {
        Polyhedron {
            constraints: Vec::new(),
            bottom: false,
        }
    }

    pub fn bottom() -> Self {
        Polyhedron {
            constraints: Vec::new(),
            bottom: true,
        }
    }

    pub fn from_constraints<I>(cs: I) -> Self
    where
        I: IntoIterator<Item = Constraint>,
    {
        let mut set: Vec<Constraint> = cs.into_iter().collect();
        set.sort();
        set.dedup();
        Polyhedron {
            constraints: set,
            bottom: false,
        }
    }

    /// From a conjunction of linear atoms.
    pub fn from_atoms<'a, I>(atoms: I) -> Self
    where
        I: IntoIterator<Item = &'a Atom>,
    {
        let mut cs = Vec::new();
        for a in atoms {
            match Constraint::from_atom(a) {
                Ok(c) => cs.push(c),
                Err(true) => {}
                Err(false) => return Polyhedron::bottom(),
            }
        }
        Polyhedron::from_constraints(cs)
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.constraints
            .iter()
            .flat_map(|c| c.coeffs.keys().cloned())
            .collect()
    }

    pub fn to_formula(&self) -> Formula {
        if self.bottom {
            return Formula::False;
        }
        Formula::and(self.constraints.iter().map(|c| c.to_formula()).collect())
    }

    /// `¬P` as a disjunction of negated constraints.
    pub fn negation(&self) -> Formula {
        self.to_formula().negate()
    }

    fn lp_rows(&self, index: &BTreeMap<Symbol, usize>) -> Vec<LpRow> {
        self.constraints
            .iter()
            .map(|c| LpRow {
                coeffs: dense(c, index),
                rel: if c.eq { LpRel::Eq } else { LpRel::Le },
                rhs: -c.constant.clone(),
            })
            .collect()
    }

    /// Rational emptiness check.
    pub fn is_empty(&self) -> bool {
        if self.bottom {
            return true;
        }
        let index = index_of(self.symbols());
        !feasible(index.len(), &self.lp_rows(&index))
    }

    /// Supremum of `Σ coeffs·x` over the polyhedron (`None` if unbounded or empty).
    pub fn maximize(&self, coeffs: &BTreeMap<Symbol, Rational>) -> Option<Rational> {
        if self.bottom {
            return None;
        }
        let mut syms = self.symbols();
        syms.extend(coeffs.keys().cloned());
        let index = index_of(syms);
        let mut obj = vec![Rational::zero(); index.len()];
        for (s, c) in coeffs {
            obj[index[s]] = c.clone();
        }
        match maximize(&obj, &self.lp_rows(&index)) {
            LpOutcome::Optimal(v) => Some(v),
            _ => None,
        }
    }

    /// Whether every point of `self` satisfies `c` (rational reasoning).
    pub fn entails_constraint(&self, c: &Constraint) -> bool {
        if self.bottom || self.is_empty() {
            return true;
        }
        self.implies_nonempty(c)
    }

    /// As [`Polyhedron::entails_constraint`], for `self` known to be nonempty.
    fn implies_nonempty(&self, c: &Constraint) -> bool {
        let le = |coeffs: &BTreeMap<Symbol, Rational>, k: &Rational| {
            self.maximize(coeffs).is_some_and(|m| m + k <= Rational::zero())
        };
        if c.eq {
            let neg: BTreeMap<Symbol, Rational> = c.coeffs.iter().map(|(s, v)| (s.clone(), -v.clone())).collect();
            le(&c.coeffs, &c.constant) && le(&neg, &-c.constant.clone())
        } else {
            le(&c.coeffs, &c.constant)
        }
    }

    /// `self ⊆ other`.
    pub fn leq(&self, other: &Polyhedron) -> bool {
        if self.bottom {
            return true;
        }
        if other.bottom {
            return self.is_empty();
        }
        other.constraints.iter().all(|c| self.entails_constraint(c))
    }

    pub fn meet(&self, other: &Polyhedron) -> Polyhedron {
        if self.bottom || other.bottom {
            return Polyhedron::bottom();
        }
        Polyhedron::from_constraints(self.constraints.iter().chain(&other.constraints).cloned())
    }

    /// Eliminates `xs` by Fourier–Motzkin, falling back to bounds on the
    /// remaining symbols once more than `budget` constraints are live.
    pub fn project(&self, xs: &BTreeSet<Symbol>, budget: usize) -> (Polyhedron, ProjectStats) {
        let mut stats = ProjectStats::default();
        if self.bottom {
            return (self.clone(), stats);
        }
        // each constraint carries the input constraints it was derived from
        let mut cs: Vec<(Constraint, BTreeSet<usize>)> =
            self.constraints.iter().cloned().enumerate().map(|(i, c)| (c, BTreeSet::from([i]))).collect();
        stats.peak_constraints = cs.len();
        let mut eliminated = 0usize;

        let mut remaining: Vec<Symbol> = xs.iter().cloned().collect();
        loop {
            remaining.retain(|x| cs.iter().any(|(c, _)| c.mentions(x)));
            if remaining.is_empty() {
                break;
            }
            eliminated += 1;
            // equalities first: substitute a definition of x
            let eq = remaining
                .iter()
                .enumerate()
                .find_map(|(i, x)| cs.iter().position(|(c, _)| c.eq && c.mentions(x)).map(|p| (i, p)));
            if let Some((i, pos)) = eq {
                let x = remaining.swap_remove(i);
                match eliminate_by_equality(cs, pos, &x) {
                    Some(next) => cs = next,
                    None => return (Polyhedron::bottom(), stats),
                }
                continue;
            }
            // cheapest symbol first
            let (pick, _) = remaining
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let p = cs.iter().filter(|(c, _)| c.coeff(x).is_positive()).count();
                    let n = cs.iter().filter(|(c, _)| c.coeff(x).is_negative()).count();
                    (i, p * n)
                })
                .min_by_key(|(_, cost)| *cost)
                .unwrap();
            let x = remaining.swap_remove(pick);
            let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
            for (c, o) in cs {
                let a = c.coeff(&x);
                if a.is_zero() {
                    rest.push((c, o));
                } else if a.is_positive() {
                    pos.push((c, o));
                } else {
                    neg.push((c, o));
                }
            }
            for (p, po) in &pos {
                for (n, no) in &neg {
                    let origins: BTreeSet<usize> = po.union(no).copied().collect();
                    // Chernikov: more ancestors than eliminated symbols + 1 means redundant
                    if origins.len() > eliminated + 1 {
                        continue;
                    }
                    let (a, b) = (-n.coeff(&x), p.coeff(&x));
                    let (coeffs, k) = p.combine(&a, n, &b);
                    match Constraint::new(coeffs, k, false) {
                        Ok(c) => rest.push((c, origins)),
                        Err(true) => {}
                        Err(false) => return (Polyhedron::bottom(), stats),
                    }
                }
            }
            cs = dedup_tagged(rest);
            stats.peak_constraints = stats.peak_constraints.max(cs.len());
            if cs.len() > budget {
                stats.interval_fallback = true;
                return (self.interval_projection(xs), stats);
            }
        }
        let p = Polyhedron::from_constraints(syntactic_prune(cs.into_iter().map(|(c, _)| c).collect()));
        (p.prune(), stats)
    }

    /// Constraints free of `xs` plus a bounding box of the other symbols.
    fn interval_projection(&self, xs: &BTreeSet<Symbol>) -> Polyhedron {
        let mut out: Vec<Constraint> = self
            .constraints
            .iter()
            .filter(|c| c.coeffs.keys().all(|s| !xs.contains(s)))
            .cloned()
            .collect();
        for s in self.symbols().difference(xs) {
            let unit: BTreeMap<Symbol, Rational> = [(s.clone(), Rational::one())].into();
            let neg: BTreeMap<Symbol, Rational> = [(s.clone(), -Rational::one())].into();
            if let Some(hi) = self.maximize(&unit) {
                out.extend(Constraint::new(unit.clone(), -hi, false).ok());
            }
            if let Some(lo) = self.maximize(&neg) {
                out.extend(Constraint::new(neg.clone(), -lo, false).ok());
            }
        }
        Polyhedron::from_constraints(out)
    }

    /// Merges opposite inequalities into equalities and drops constraints
    /// implied by the rest.
    pub fn prune(&self) -> Polyhedron {
        if self.bottom {
            return self.clone();
        }
        let cs = syntactic_prune(self.constraints.clone());
        if cs.len() > LP_PRUNE_LIMIT {
            return Polyhedron::from_constraints(cs);
        }
        match redundancy_prune(cs) {
            Some(cs) => Polyhedron::from_constraints(cs),
            None => Polyhedron::bottom(),
        }
    }

    /// Closed convex hull of the union.
    pub fn join(&self, other: &Polyhedron, budget: usize) -> (Polyhedron, ProjectStats) {
        if self.bottom {
            return (other.clone(), ProjectStats::default());
        }
        if other.bottom {
            return (self.clone(), ProjectStats::default());
        }
        if self.leq(other) {
            return (other.clone(), ProjectStats::default());
        }
        if other.leq(self) {
            return (self.clone(), ProjectStats::default());
        }
        // z = y + (z − y): y ∈ λ·P, (z − y) ∈ (1 − λ)·Q, 0 ≤ λ ≤ 1
        let syms: BTreeSet<Symbol> = self.symbols().union(&other.symbols()).cloned().collect();
        let copies: BTreeMap<Symbol, Symbol> = syms.iter().map(|s| (s.clone(), Symbol::fresh("y"))).collect();
        let lambda = Symbol::fresh("lambda");
        let mut cs = Vec::new();
        for c in &self.constraints {
            let mut coeffs: BTreeMap<Symbol, Rational> =
                c.coeffs.iter().map(|(s, a)| (copies[s].clone(), a.clone())).collect();
            coeffs.insert(lambda.clone(), c.constant.clone());
            cs.extend(Constraint::new(coeffs, Rational::zero(), c.eq).ok());
        }
        for c in &other.constraints {
            let mut coeffs: BTreeMap<Symbol, Rational> = BTreeMap::new();
            for (s, a) in &c.coeffs {
                coeffs.insert(s.clone(), a.clone());
                coeffs.insert(copies[s].clone(), -a.clone());
            }
            coeffs.insert(lambda.clone(), -c.constant.clone());
            cs.extend(Constraint::new(coeffs, c.constant.clone(), c.eq).ok());
        }
        let unit = |k: i64| -> BTreeMap<Symbol, Rational> { [(lambda.clone(), Rational::from_integer(BigInt::from(k)))].into() };
        cs.extend(Constraint::new(unit(-1), Rational::zero(), false).ok());
        cs.extend(Constraint::new(unit(1), -Rational::one(), false).ok());
        let lifted = Polyhedron::from_constraints(cs);
        let mut elim: BTreeSet<Symbol> = copies.into_values().collect();
        elim.insert(lambda);
        lifted.project(&elim, budget)
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Drops every constraint implied by the others; `None` if infeasible.
///
/// Each test is an LP over a small working set of constraints, grown with
/// the constraints its optimum violates.
fn redundancy_prune(cs: Vec<Constraint>) -> Option<Vec<Constraint>> {
    let all = Polyhedron::from_constraints(cs.clone());
    if all.is_empty() {
        return None;
    }
    let index = index_of(all.symbols());
    let rows: Vec<LpRow> = cs
        .iter()
        .map(|c| LpRow {
            coeffs: dense(c, &index),
            rel: if c.eq { LpRel::Eq } else { LpRel::Le },
            rhs: -c.constant.clone(),
        })
        .collect();
    let satisfied = |row: &LpRow, x: &[Rational]| {
        let v: Rational = row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match row.rel {
            LpRel::Le => v <= row.rhs,
            LpRel::Eq => v == row.rhs,
        }
    };
    let mut alive = vec![true; cs.len()];
    let mut work: BTreeSet<usize> = (0..cs.len()).filter(|&i| cs[i].eq).collect();
    for i in 0..cs.len() {
        if cs[i].eq {
            continue;
        }
        loop {
            let mut lp: Vec<LpRow> = work.iter().filter(|&&j| j != i).map(|&j| rows[j].clone()).collect();
            let mut cap = rows[i].clone();
            cap.rhs += Rational::one();
            lp.push(cap);
            let (best, x) = match maximize_at(&rows[i].coeffs, &lp) {
                Ok(r) => r,
                Err(_) => break,
            };
            if best <= rows[i].rhs {
                alive[i] = false;
                work.remove(&i);
                break;
            }
            let violated = (0..cs.len()).find(|&j| j != i && alive[j] && !work.contains(&j) && !satisfied(&rows[j], &x));
            match violated {
                Some(j) => {
                    work.insert(j);
                }
                None => {
                    work.insert(i);
                    break;
                }
            }
        }
    }
    Some(cs.into_iter().zip(alive).filter(|(_, a)| *a).map(|(c, _)| c).collect())
}

/// Removes equality `cs[pos]` and substitutes its solution for `x` elsewhere;
/// `None` if the result is infeasible.
fn eliminate_by_equality(
    mut cs: Vec<(Constraint, BTreeSet<usize>)>,
    pos: usize,
    x: &Symbol,
) -> Option<Vec<(Constraint, BTreeSet<usize>)>> {
    let (e, eo) = cs.swap_remove(pos);
    let a = e.coeff(x);
    let def_coeffs = e
        .coeffs
        .iter()
        .filter(|(s, _)| *s != x)
        .map(|(s, c)| (s.clone(), -c / &a))
        .collect();
    let def = (def_coeffs, -&e.constant / &a);
    let mut next = Vec::with_capacity(cs.len());
    for (c, o) in cs {
        let o = if c.mentions(x) { o.union(&eo).copied().collect() } else { o };
        match c.substitute(x, &def) {
            Ok(c) => next.push((c, o)),
            Err(true) => {}
            Err(false) => return None,
        }
    }
    Some(next)
}

/// Keeps the tightest inequality per direction, preferring fewer ancestors on ties.
fn dedup_tagged(cs: Vec<(Constraint, BTreeSet<usize>)>) -> Vec<(Constraint, BTreeSet<usize>)> {
    type Key = (BTreeMap<Symbol, Rational>, Option<Rational>);
    let mut best: BTreeMap<Key, (Rational, BTreeSet<usize>)> = BTreeMap::new();
    for (c, o) in cs {
        let key = (c.coeffs, c.eq.then(|| c.constant.clone()));
        match best.get_mut(&key) {
            Some((k, ko)) => {
                let tighter = key.1.is_none() && c.constant > *k;
                if tighter || (c.constant == *k && o.len() < ko.len()) {
                    *k = c.constant;
                    *ko = o;
                }
            }
            None => {
                best.insert(key, (c.constant, o));
            }
        }
    }
    best.into_iter()
        .map(|((coeffs, eq), (constant, o))| (Constraint { coeffs, constant, eq: eq.is_some() }, o))
        .collect()
}

fn index_of(syms: BTreeSet<Symbol>) -> BTreeMap<Symbol, usize> {
    syms.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
}

fn dense(c: &Constraint, index: &BTreeMap<Symbol, usize>) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); index.len()];
    for (s, a) in &c.coeffs {
        v[index[s]] = a.clone();
    }
    v
}

/// Keeps the tightest inequality per direction and turns `t ≤ 0 ∧ −t ≤ 0`
/// into `t = 0`.
fn syntactic_prune(cs: Vec<Constraint>) -> Vec<Constraint> {
    let mut eqs: BTreeSet<Constraint> = BTreeSet::new();
    let mut best: BTreeMap<BTreeMap<Symbol, Rational>, Rational> = BTreeMap::new();
    for c in cs {
        if c.eq {
            eqs.insert(c);
        } else {
            best.entry(c.coeffs)
                .and_modify(|k| {
                    if c.constant > *k {
                        *k = c.constant.clone()
                    }
                })
                .or_insert(c.constant);
        }
    }
    let mut out: Vec<Constraint> = Vec::new();
    let mut used: BTreeSet<BTreeMap<Symbol, Rational>> = BTreeSet::new();
    for (dir, k) in &best {
        if used.contains(dir) {
            continue;
        }
        let opposite: BTreeMap<Symbol, Rational> = dir.iter().map(|(s, a)| (s.clone(), -a.clone())).collect();
        if let Some(k2) = best.get(&opposite) {
            // dir + k ≤ 0 and −dir + k2 ≤ 0 meet when k2 = −k
            if *k2 == -k.clone() {
                used.insert(opposite);
                used.insert(dir.clone());
                out.extend(Constraint::new(dir.clone(), k.clone(), true).ok());
                continue;
            }
        }
        out.push(Constraint {
            coeffs: dir.clone(),
            constant: k.clone(),
            eq: false,
        });
    }
    out.extend(eqs);
    out.sort();
    out.dedup();
    out
}
