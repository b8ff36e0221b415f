use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{Recurrence, RecurrenceKind};
use crate::formula::{Formula, Rel, Symbol, Term, TransitionFormula, Var};
use crate::linalg::solve_lambda_system;
use crate::polyhedra::{affine_hull, convex_hull};
use crate::smt::{SolverError, SolverSession};
use crate::Rational;

/// Errors after which a detection step is skipped rather than aborted.
pub(crate) fn recoverable(e: &SolverError) -> bool {
    matches!(e, SolverError::Timeout | SolverError::Unknown(_) | SolverError::Crash(_))
}

/// Equations `x′ = x + c`: read `c` off one model, then confirm it.
pub fn simple_recurrences(session: &mut SolverSession, body: &TransitionFormula) -> Result<Vec<Recurrence>, SolverError> {
    let Some(m) = session.get_model(body.formula())? else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for v in body.vars().iter() {
        let (Some(post), Some(pre)) = (m.get(&v.post()), m.get(&v.pre())) else {
            // a variable absent from the formula is unconstrained
            continue;
        };
        let c = post - pre;
        let r = Recurrence::equation(RecurrenceKind::Simple, v.clone(), BTreeMap::new(), c, 0);
        match session.entails(body.formula(), &r.to_formula()) {
            Ok(true) => out.push(r),
            Ok(false) => {}
            Err(e) if recoverable(&e) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Stratified recurrence equations, stratum by stratum, starting from the
/// simple ones. Each later stratum may only mention induction variables of
/// strictly lower strata.
pub fn stratified_recurrences(
    session: &mut SolverSession,
    body: &TransitionFormula,
    simple: &[Recurrence],
    max_stratum: usize,
) -> Result<Vec<Recurrence>, SolverError> {
    let vars: Vec<Var> = body.vars().to_vec();
    let n = vars.len();
    let mut found: Vec<Recurrence> = simple.to_vec();
    let mut iv: BTreeSet<usize> = simple
        .iter()
        .filter_map(|r| r.var())
        .filter_map(|v| vars.iter().position(|w| w == v))
        .collect();
    if iv.len() == n || max_stratum == 0 {
        return Ok(found);
    }
    let syms = body.state_symbols();
    let hull = affine_hull(session, body.formula(), &syms)?;
    if hull.hull.is_bottom() {
        return Ok(found);
    }
    let (a, b) = hull.hull.matrix();
    for stratum in 1..=max_stratum {
        let lower: Vec<usize> = iv.iter().copied().collect();
        let mut fresh = Vec::new();
        for i in (0..n).filter(|i| !iv.contains(i)) {
            let Some((c, d)) = solve_lambda_system(&a, &b, i, &lower, n) else {
                continue;
            };
            // x_i − x_i′ + Σ c_j·x_j = d
            let coeffs: BTreeMap<Var, Rational> = lower
                .iter()
                .filter(|j| **j != i)
                .map(|j| (vars[*j].clone(), c[*j].clone()))
                .collect();
            let kind = if coeffs.values().all(Zero::is_zero) {
                RecurrenceKind::Simple
            } else {
                RecurrenceKind::Stratified
            };
            let stratum = if kind == RecurrenceKind::Simple { 0 } else { stratum };
            let r = Recurrence::equation(kind, vars[i].clone(), coeffs, -d, stratum);
            let ok = if hull.partial {
                match session.entails(body.formula(), &r.to_formula()) {
                    Ok(ok) => ok,
                    Err(e) if recoverable(&e) => false,
                    Err(e) => return Err(e),
                }
            } else {
                true
            };
            if ok {
                fresh.push((i, r));
            }
        }
        if fresh.is_empty() {
            break;
        }
        for (i, r) in fresh {
            iv.insert(i);
            found.push(r);
        }
    }
    Ok(found)
}

/// Recurrence inequations over the variables outside `siv`, read off the
/// convex hull of the body in terms of difference variables `δx = x′ − x`.
pub fn recurrence_inequations(
    session: &mut SolverSession,
    body: &TransitionFormula,
    siv: &BTreeSet<Var>,
    budget: usize,
) -> Result<Vec<Recurrence>, SolverError> {
    let rest: Vec<Var> = body.vars().iter().filter(|v| !siv.contains(*v)).cloned().collect();
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    let deltas: BTreeMap<Symbol, Var> = rest
        .iter()
        .map(|v| (Symbol::fresh(&format!("d_{v}")), v.clone()))
        .collect();
    let mut parts = vec![body.formula().clone()];
    for (d, v) in &deltas {
        parts.push(Formula::eq(Term::sym(d.clone()), Term::sym(v.post()) - Term::sym(v.pre())));
    }
    let psi = Formula::and(parts);
    let mut xs: BTreeSet<Symbol> = body.aux();
    xs.extend(body.post_symbols());
    xs.extend(rest.iter().map(Var::pre));
    let hull = convex_hull(session, &psi, &xs, budget)?;
    let mut out = Vec::new();
    for c in hull.hull.constraints() {
        // Σ a·δ + Σ b·y + e ⋈ 0  becomes  a·x′ ⋈ a·x − b·y − e
        let mut lhs = BTreeMap::new();
        let mut iv = BTreeMap::new();
        for (s, a) in c.coeffs() {
            if let Some(v) = deltas.get(s) {
                lhs.insert(v.clone(), a.clone());
            } else if let Some(v) = s.var() {
                iv.insert(v.clone(), -a.clone());
            }
        }
        if lhs.is_empty() {
            continue;
        }
        out.push(Recurrence {
            kind: RecurrenceKind::Inequation,
            lhs,
            rel: if c.is_eq() { Rel::Eq } else { Rel::Le },
            iv,
            constant: -c.constant().clone(),
            stratum: 0,
        });
    }
    Ok(out)
}
