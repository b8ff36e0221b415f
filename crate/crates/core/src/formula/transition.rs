use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed};

use super::formula::{Formula, Rel};
use super::symbol::{Symbol, Var};
use super::term::{Node, Term};
use crate::Rational;

/// Formula over `Var ∪ Var′` plus existentially quantified auxiliary symbols,
/// denoting an input/output relation on program states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransitionFormula {
    vars: Arc<[Var]>,
    formula: Formula,
}

/// `⋀_{x ∈ X} x′ = x`.
pub fn stable<'a, I>(xs: I) -> Formula
where
    I: IntoIterator<Item = &'a Var>,
{
    Formula::and(
        xs.into_iter()
            .map(|v| Formula::eq(Term::sym(v.post()), Term::sym(v.pre())))
            .collect(),
    )
}

impl TransitionFormula {
    pub fn new(vars: Arc<[Var]>, formula: Formula) -> Self {
        TransitionFormula { vars, formula }
    }

    /// Skip: every variable keeps its value.
    pub fn identity(vars: Arc<[Var]>) -> Self {
        let formula = stable(vars.iter());
        TransitionFormula { vars, formula }
    }

    pub fn bottom(vars: Arc<[Var]>) -> Self {
        TransitionFormula {
            vars,
            formula: Formula::False,
        }
    }

    pub fn vars(&self) -> &Arc<[Var]> {
        &self.vars
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn into_formula(self) -> Formula {
        self.formula
    }

    pub fn with_formula(&self, formula: Formula) -> Self {
        TransitionFormula {
            vars: self.vars.clone(),
            formula,
        }
    }

    /// Auxiliary (existentially quantified) symbols occurring in the formula.
    pub fn aux(&self) -> BTreeSet<Symbol> {
        self.formula.symbols().into_iter().filter(Symbol::is_aux).collect()
    }

    pub fn pre_symbols(&self) -> Vec<Symbol> {
        self.vars.iter().map(Var::pre).collect()
    }

    pub fn post_symbols(&self) -> Vec<Symbol> {
        self.vars.iter().map(Var::post).collect()
    }

    /// `Var ∪ Var′` in the index order `[x1..xn, x1′..xn′]`.
    pub fn state_symbols(&self) -> Vec<Symbol> {
        let mut v = self.pre_symbols();
        v.extend(self.post_symbols());
        v
    }

    pub fn is_linear(&self) -> bool {
        self.formula.is_linear()
    }

    /// Sequential composition `φ ⊙ ψ = ∃x″. φ[x″/x′] ∧ ψ[x″/x]`, with the
    /// intermediates kept as fresh auxiliary symbols and eliminated by
    /// equality propagation where a definition is syntactically available.
    pub fn seq(&self, other: &TransitionFormula) -> TransitionFormula {
        debug_assert_eq!(self.vars, other.vars, "vocabulary mismatch");
        let mine = self.aux();
        let clash: BTreeMap<Symbol, Symbol> = other
            .aux()
            .into_iter()
            .filter(|s| mine.contains(s))
            .map(|s| {
                let hint = match &s {
                    Symbol::Aux { hint, .. } => hint.to_string(),
                    _ => unreachable!(),
                };
                (s, Symbol::fresh(&hint))
            })
            .collect();
        let mids: BTreeMap<Var, Symbol> = self
            .vars
            .iter()
            .map(|v| (v.clone(), Symbol::fresh(&format!("{}''", v))))
            .collect();

        let left = self.formula.substitute(&|s: &Symbol| match s {
            Symbol::Post(v) => mids.get(v).map(|m| Term::sym(m.clone())),
            _ => None,
        });
        let right = other.formula.substitute(&|s: &Symbol| match s {
            Symbol::Pre(v) => mids.get(v).map(|m| Term::sym(m.clone())),
            Symbol::Aux { .. } => clash.get(s).map(|m| Term::sym(m.clone())),
            _ => None,
        });
        let candidates: BTreeSet<Symbol> = mids.into_values().collect();
        let formula = propagate_equalities(Formula::and(vec![left, right]), &candidates);
        TransitionFormula {
            vars: self.vars.clone(),
            formula,
        }
    }

    /// Choice `φ ⊕ ψ = φ ∨ ψ`.
    pub fn choice(&self, other: &TransitionFormula) -> TransitionFormula {
        debug_assert_eq!(self.vars, other.vars, "vocabulary mismatch");
        TransitionFormula {
            vars: self.vars.clone(),
            formula: Formula::or(vec![self.formula.clone(), other.formula.clone()]),
        }
    }

    /// Simultaneous substitution of free symbols.
    pub fn substitute(&self, mapping: &BTreeMap<Symbol, Term>) -> TransitionFormula {
        self.with_formula(self.formula.substitute(&|s: &Symbol| mapping.get(s).cloned()))
    }

    /// Renames every auxiliary symbol to a fresh one.
    pub fn refresh_aux(&self) -> TransitionFormula {
        let mapping: BTreeMap<Symbol, Term> = self
            .aux()
            .into_iter()
            .map(|s| {
                let hint = match &s {
                    Symbol::Aux { hint, .. } => hint.to_string(),
                    _ => unreachable!(),
                };
                (s, Term::sym(Symbol::fresh(&hint)))
            })
            .collect();
        self.substitute(&mapping)
    }
}

impl fmt::Display for TransitionFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)
    }
}

/// Finds a top-level conjunct `s = t` for some candidate `s` with unit
/// coefficient, substitutes `t` for `s` everywhere, and repeats.
pub fn propagate_equalities(mut formula: Formula, candidates: &BTreeSet<Symbol>) -> Formula {
    loop {
        let found = formula.conjuncts().into_iter().enumerate().find_map(|(i, c)| {
            let Formula::Atom(a) = c else { return None };
            if a.rel() != Rel::Eq {
                return None;
            }
            let t = a.term();
            let mut inner = BTreeSet::new();
            for n in t.nonlinear_nodes() {
                n.symbols_into(&mut inner);
            }
            t.nodes().find_map(|(n, c)| match n {
                Node::Sym(s)
                    if candidates.contains(s) && c.abs().is_one() && !inner.contains(s) =>
                {
                    // c·s + rest = 0  =>  s = -rest / c
                    let rest = t.clone() - Term::sym(s.clone()).scale(c);
                    let def = rest.scale(&(-Rational::one() / c));
                    Some((i, s.clone(), def))
                }
                _ => None,
            })
        });
        let Some((idx, sym, def)) = found else {
            return formula;
        };
        let rest: Vec<Formula> = formula
            .conjuncts()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, c)| c.clone())
            .collect();
        formula = Formula::and(rest)
            .substitute(&|s: &Symbol| (s == &sym).then(|| def.clone()));
    }
}
