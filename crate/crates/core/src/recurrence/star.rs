use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::detect::recoverable;
use super::{
    close, recurrence_inequations, simple_recurrences, stratified_recurrences, ClosedForm, GuardStrategy,
    IterationConfig, Recurrence,
};
use crate::formula::{edge_semantics, Formula, Symbol, Term, TransitionFormula, Var};
use crate::lang::{Edge, Vertex};
use crate::linearize::lin;
use crate::pathexpr::Interpretation;
use crate::polyhedra::convex_hull;
use crate::smt::{SolverError, SolverSession};

/// Result of the iteration operator on one loop body.
#[derive(Clone, Debug)]
pub struct StarSummary {
    /// Loop header the summary was computed for, if known.
    pub header: Option<Vertex>,
    /// `(φ⁺ ∧ guard) ∨ identity`.
    pub formula: TransitionFormula,
    /// The body the recurrences were extracted from (linearized if needed).
    pub body: TransitionFormula,
    pub recurrences: Vec<Recurrence>,
    pub closed_forms: Vec<ClosedForm>,
    pub plus: Formula,
    pub guard: Formula,
    /// Iteration-count symbol of `plus`.
    pub k: Option<Symbol>,
    /// Steps that were skipped or weakened, with the reason.
    pub notes: Vec<String>,
}

impl StarSummary {
    fn trivial(body: &TransitionFormula, formula: TransitionFormula, note: Option<String>) -> Self {
        StarSummary {
            header: None,
            formula,
            body: body.clone(),
            recurrences: Vec::new(),
            closed_forms: Vec::new(),
            plus: Formula::True,
            guard: Formula::True,
            k: None,
            notes: note.into_iter().collect(),
        }
    }

    /// Summary that keeps only `x′ = x ∨ true`, i.e. forgets everything.
    fn havoc(body: &TransitionFormula, why: String) -> Self {
        Self::trivial(body, body.with_formula(Formula::True), Some(why))
    }
}

fn interval_guard(session: &mut SolverSession, body: &TransitionFormula) -> Result<Formula, SolverError> {
    let mut parts = Vec::new();
    for s in body.state_symbols() {
        let t = Term::sym(s);
        if let Some(i) = session.optimize_bounds(body.formula(), &t)? {
            if let Some(lo) = i.lo {
                parts.push(Formula::le(Term::constant(lo), t.clone()));
            }
            if let Some(hi) = i.hi {
                parts.push(Formula::le(t.clone(), Term::constant(hi)));
            }
        }
    }
    Ok(Formula::and(parts))
}

/// Over-approximation of `(∃Var′. body) ∧ (∃Var. body)`: what holds before
/// and after every iteration.
pub fn guard(
    session: &mut SolverSession,
    body: &TransitionFormula,
    strategy: GuardStrategy,
    budget: usize,
) -> Result<Formula, SolverError> {
    match strategy {
        GuardStrategy::None => Ok(Formula::True),
        GuardStrategy::Interval => interval_guard(session, body),
        GuardStrategy::Hull => {
            let aux = body.aux();
            let mut pre_xs: BTreeSet<Symbol> = aux.clone();
            pre_xs.extend(body.post_symbols());
            let mut post_xs = aux;
            post_xs.extend(body.pre_symbols());
            let pre = convex_hull(session, body.formula(), &pre_xs, budget)?;
            let post = convex_hull(session, body.formula(), &post_xs, budget)?;
            Ok(Formula::and(vec![pre.hull.to_formula(), post.hull.to_formula()]))
        }
    }
}

/// `k ≥ 1 ∧ ⋀ closed forms`, with a fresh iteration count `k`.
pub fn plus(closed: &[ClosedForm]) -> (Formula, Symbol) {
    let k = Symbol::fresh("k");
    let mut parts = vec![Formula::le(Term::one(), Term::sym(k.clone()))];
    parts.extend(closed.iter().map(|c| c.instantiate(&k)));
    (Formula::and(parts), k)
}

/// The iteration operator: a transition formula describing any number of
/// executions of `body`, including zero.
pub fn star(session: &mut SolverSession, body: &TransitionFormula, cfg: &IterationConfig) -> Result<StarSummary, SolverError> {
    let identity = TransitionFormula::identity(body.vars().clone());
    match session.get_model(body.formula()) {
        Ok(None) => return Ok(StarSummary::trivial(body, identity, None)),
        Ok(Some(_)) => {}
        Err(e) if recoverable(&e) => return Ok(StarSummary::havoc(body, format!("satisfiability: {e}"))),
        Err(e) => return Err(e),
    }
    let mut notes = Vec::new();
    let mut work = body.clone();
    if !work.is_linear() {
        if !cfg.linearize_before_star {
            return Ok(StarSummary::havoc(body, "non-linear body".into()));
        }
        match lin(session, body.formula()) {
            Ok(l) => work = body.with_formula(l.formula),
            Err(e) if recoverable(&e) => return Ok(StarSummary::havoc(body, format!("linearization: {e}"))),
            Err(e) => return Err(e),
        }
    }

    let simple = match simple_recurrences(session, &work) {
        Ok(r) => r,
        Err(e) if recoverable(&e) => {
            notes.push(format!("simple recurrences: {e}"));
            Vec::new()
        }
        Err(e) => return Err(e),
    };
    let mut recurrences = simple.clone();
    if cfg.stratified {
        let max = cfg.max_stratum.unwrap_or(work.vars().len()).max(1);
        match stratified_recurrences(session, &work, &simple, max) {
            Ok(r) => recurrences = r,
            Err(e) if recoverable(&e) => notes.push(format!("stratified recurrences: {e}")),
            Err(e) => return Err(e),
        }
    }
    let mut lower: BTreeMap<Var, ClosedForm> = BTreeMap::new();
    let mut closed_forms = Vec::new();
    for r in &recurrences {
        let c = close(r, &lower);
        lower.insert(r.var().expect("equation").clone(), c.clone());
        closed_forms.push(c);
    }
    if cfg.inequations {
        let siv: BTreeSet<Var> = lower.keys().cloned().collect();
        match recurrence_inequations(session, &work, &siv, cfg.budget) {
            Ok(ineqs) => {
                for r in ineqs {
                    closed_forms.push(close(&r, &lower));
                    recurrences.push(r);
                }
            }
            Err(e) if recoverable(&e) => notes.push(format!("inequations: {e}")),
            Err(e) => return Err(e),
        }
    }
    let (plus_formula, k) = plus(&closed_forms);

    let mut strategy = cfg.guard;
    let guard_formula = loop {
        match guard(session, &work, strategy, cfg.budget) {
            Ok(g) => break g,
            Err(e) if recoverable(&e) => {
                notes.push(format!("{strategy} guard: {e}"));
                strategy = match strategy {
                    GuardStrategy::Hull => GuardStrategy::Interval,
                    _ => GuardStrategy::None,
                };
            }
            Err(e) => return Err(e),
        }
    };
    let formula = Formula::or(vec![
        Formula::and(vec![plus_formula.clone(), guard_formula.clone()]),
        identity.formula().clone(),
    ]);
    Ok(StarSummary {
        header: None,
        formula: body.with_formula(formula),
        body: work,
        recurrences,
        closed_forms,
        plus: plus_formula,
        guard: guard_formula,
        k: Some(k),
        notes,
    })
}

/// Evaluation of path expressions as transition formulas, with loops
/// summarized by [`star`].
pub struct Lra<'s> {
    pub session: &'s mut SolverSession,
    pub config: IterationConfig,
    vars: Arc<[Var]>,
    /// Every loop summary computed so far, in evaluation order.
    pub summaries: Vec<StarSummary>,
}

impl<'s> Lra<'s> {
    pub fn new(session: &'s mut SolverSession, vars: Arc<[Var]>, config: IterationConfig) -> Self {
        Lra {
            session,
            config,
            vars,
            summaries: Vec::new(),
        }
    }
}

impl Interpretation for Lra<'_> {
    type Value = TransitionFormula;
    type Error = SolverError;

    fn edge(&mut self, e: &Edge) -> Result<TransitionFormula, SolverError> {
        Ok(edge_semantics(&e.label, &self.vars))
    }

    fn seq(&mut self, a: &TransitionFormula, b: &TransitionFormula) -> Result<TransitionFormula, SolverError> {
        Ok(a.seq(b))
    }

    fn choice(&mut self, a: &TransitionFormula, b: &TransitionFormula) -> Result<TransitionFormula, SolverError> {
        Ok(a.choice(b))
    }

    fn star(&mut self, body: &TransitionFormula, header: Option<Vertex>) -> Result<TransitionFormula, SolverError> {
        let mut s = star(self.session, body, &self.config)?;
        s.header = header;
        let f = s.formula.clone();
        self.summaries.push(s);
        Ok(f)
    }

    fn one(&mut self) -> TransitionFormula {
        TransitionFormula::identity(self.vars.clone())
    }

    fn zero(&mut self) -> TransitionFormula {
        TransitionFormula::bottom(self.vars.clone())
    }
}
