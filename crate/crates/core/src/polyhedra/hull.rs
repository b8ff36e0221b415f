use std::collections::BTreeSet;

use super::polyhedron::{Constraint, Polyhedron, ProjectStats};
use crate::formula::{Atom, Formula, Symbol};
use crate::smt::{Model, SatResult, SolverError, SolverSession};

/// Iteration cap for the convex hull loop; reaching it counts as a partial result.
const MAX_CUBES: usize = 256;

/// A conjunction of atoms of `psi` that `m` satisfies and that entails `psi`,
/// found by following the satisfied branch of each disjunction. `None` if
/// `m` does not satisfy `psi`.
pub fn implicant_cube(psi: &Formula, m: &Model) -> Option<Vec<Atom>> {
    let mut out = Vec::new();
    collect(psi, m, &mut out).then_some(out)
}

fn collect(f: &Formula, m: &Model, out: &mut Vec<Atom>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => {
            if a.eval(&|s: &Symbol| m.get(s).cloned()).unwrap_or(false) {
                out.push(a.clone());
                true
            } else {
                false
            }
        }
        Formula::And(fs) => fs.iter().all(|g| collect(g, m, out)),
        Formula::Or(fs) => fs.iter().any(|g| {
            if m.eval_formula(g).unwrap_or(false) {
                collect(g, m, out)
            } else {
                false
            }
        }),
    }
}

#[derive(Clone, Debug)]
pub struct ConvexHull {
    pub hull: Polyhedron,
    pub iterations: usize,
    pub partial: bool,
    pub interval_fallback: bool,
}

/// Convex hull of `∃xs. psi`: take a model, project the cube it satisfies,
/// join, block the hull so far, repeat until unsat.
pub fn convex_hull(
    session: &mut SolverSession,
    psi: &Formula,
    xs: &BTreeSet<Symbol>,
    budget: usize,
) -> Result<ConvexHull, SolverError> {
    let mut hull = Polyhedron::bottom();
    let mut iterations = 0;
    let mut stats = ProjectStats::default();
    let all: Vec<Symbol> = psi.symbols().into_iter().collect();
    let outcome = (|| -> Result<bool, SolverError> {
        session.reset()?;
        session.assert(psi)?;
        loop {
            if iterations >= MAX_CUBES {
                return Ok(false);
            }
            match session.check()? {
                SatResult::Unsat => return Ok(true),
                SatResult::Unknown => return Err(session.unknown_error()),
                SatResult::Sat => {}
            }
            iterations += 1;
            let m = session.model_for(&all)?;
            let cube = implicant_cube(psi, &m)
                .ok_or_else(|| SolverError::Protocol(format!("model {m} does not satisfy formula")))?;
            let (q, s1) = Polyhedron::from_atoms(&cube).project(xs, budget);
            let (joined, s2) = hull.join(&q, budget);
            stats.interval_fallback |= s1.interval_fallback || s2.interval_fallback;
            hull = joined;
            session.assert(&hull.negation())?;
        }
    })();
    let complete = match outcome {
        Ok(c) => c,
        Err(e @ (SolverError::Spawn(..) | SolverError::Protocol(_))) => return Err(e),
        Err(_) => false,
    };
    if complete {
        return Ok(ConvexHull {
            hull,
            iterations,
            partial: false,
            interval_fallback: stats.interval_fallback,
        });
    }
    // keep only constraints that can be re-verified
    let kept: Vec<Constraint> = if hull.is_bottom() {
        Vec::new()
    } else {
        hull.constraints()
            .iter()
            .filter(|c| session.entails(psi, &c.to_formula()).unwrap_or(false))
            .cloned()
            .collect()
    };
    Ok(ConvexHull {
        hull: Polyhedron::from_constraints(kept),
        iterations,
        partial: true,
        interval_fallback: stats.interval_fallback,
    })
}
