use std::fmt;

use num_traits::{One, Zero};

use crate::formula::{Formula, Symbol, Term};
use crate::linalg::{dot, RationalMatrix};
use crate::smt::{Model, SatResult, SolverError, SolverSession};
use crate::Rational;

/// Affine subspace `{x | A·x = b}` over a fixed symbol vector, kept in reduced
/// row echelon form; `⊥` is the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSystem {
    syms: Vec<Symbol>,
    /// Rows `[a | b]` for `a·x = b`.
    rows: RationalMatrix,
    bottom: bool,
}

impl AffineSystem {
    pub fn bottom(syms: Vec<Symbol>) -> Self {
        let n = syms.len();
        AffineSystem {
            syms,
            rows: RationalMatrix::zeros(0, n + 1),
            bottom: true,
        }
    }

    pub fn top(syms: Vec<Symbol>) -> Self {
        let n = syms.len();
        AffineSystem {
            syms,
            rows: RationalMatrix::zeros(0, n + 1),
            bottom: false,
        }
    }

    /// `{x | a_i·x = b_i}` for the given rows `(a_i, b_i)`.
    pub fn from_equations(syms: Vec<Symbol>, eqs: Vec<(Vec<Rational>, Rational)>) -> Self {
        let n = syms.len();
        let rows = eqs
            .into_iter()
            .map(|(mut a, b)| {
                a.push(b);
                a
            })
            .collect();
        let (r, pivots) = RationalMatrix::from_rows(n + 1, rows).rref_with_pivots();
        if pivots.last() == Some(&n) {
            return AffineSystem::bottom(syms);
        }
        AffineSystem {
            syms,
            rows: r,
            bottom: false,
        }
    }

    /// The single point `x = v`.
    pub fn point(syms: Vec<Symbol>, values: &[Rational]) -> Self {
        let n = syms.len();
        let eqs = (0..n)
            .map(|i| {
                let mut a = vec![Rational::zero(); n];
                a[i] = Rational::one();
                (a, values[i].clone())
            })
            .collect();
        AffineSystem::from_equations(syms, eqs)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.syms
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    pub fn num_equations(&self) -> usize {
        self.rows.rows()
    }

    /// `(A, b)` with rows linearly independent.
    pub fn matrix(&self) -> (RationalMatrix, Vec<Rational>) {
        let n = self.syms.len();
        let a = RationalMatrix::from_rows(n, self.rows.row_vecs().into_iter().map(|mut r| {
            r.pop();
            r
        }).collect());
        let b = (0..self.rows.rows()).map(|i| self.rows[(i, n)].clone()).collect();
        (a, b)
    }

    pub fn equations(&self) -> Vec<(Vec<Rational>, Rational)> {
        let n = self.syms.len();
        self.rows
            .row_vecs()
            .into_iter()
            .map(|mut r| {
                let b = r.pop().unwrap();
                debug_assert_eq!(r.len(), n);
                (r, b)
            })
            .collect()
    }

    pub fn equation_formula(&self, a: &[Rational], b: &Rational) -> Formula {
        let lhs = Term::linear(self.syms.iter().cloned().zip(a.iter().cloned()), Rational::zero());
        Formula::eq(lhs, Term::constant(b.clone()))
    }

    pub fn to_formula(&self) -> Formula {
        if self.bottom {
            return Formula::False;
        }
        Formula::and(
            self.equations()
                .iter()
                .map(|(a, b)| self.equation_formula(a, b))
                .collect(),
        )
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        !self.bottom && self.equations().iter().all(|(a, b)| dot(a, x) == *b)
    }

    /// A point and a basis of directions.
    fn generators(&self) -> Option<(Vec<Rational>, Vec<Vec<Rational>>)> {
        if self.bottom {
            return None;
        }
        let (a, b) = self.matrix();
        let p = a.solve(&b).expect("consistent system");
        Some((p, a.nullspace()))
    }

    /// Smallest affine set containing both.
    pub fn join(&self, other: &AffineSystem) -> AffineSystem {
        assert_eq!(self.syms, other.syms, "symbol vectors differ");
        let Some((p, mut dirs)) = self.generators() else {
            return other.clone();
        };
        let Some((q, dirs2)) = other.generators() else {
            return self.clone();
        };
        dirs.extend(dirs2);
        dirs.push(q.iter().zip(&p).map(|(a, b)| a - b).collect());
        // (a, b) with a·d = 0 for every direction and a·p = b
        let n = self.syms.len();
        let mut rows: Vec<Vec<Rational>> = dirs
            .into_iter()
            .map(|mut d| {
                d.push(Rational::zero());
                d
            })
            .collect();
        let mut prow = p;
        prow.push(-Rational::one());
        rows.push(prow);
        let eqs = RationalMatrix::from_rows(n + 1, rows)
            .nullspace()
            .into_iter()
            .map(|mut v| {
                let b = v.pop().unwrap();
                (v, b)
            })
            .collect();
        AffineSystem::from_equations(self.syms.clone(), eqs)
    }
}

impl fmt::Display for AffineSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Result of the affine hull refinement loop.
#[derive(Clone, Debug)]
pub struct AffineHull {
    pub hull: AffineSystem,
    /// Number of models drawn.
    pub iterations: usize,
    /// The loop was cut short by the solver; `hull` holds only re-verified equations.
    pub partial: bool,
}

fn model_point(m: &Model, syms: &[Symbol]) -> Vec<Rational> {
    syms.iter()
        .map(|s| m.get(s).cloned().unwrap_or_else(Rational::zero))
        .collect()
}

/// Affine hull of `phi` projected onto `syms`: draw a model, join its point,
/// block the current hull, repeat until unsat.
pub fn affine_hull(session: &mut SolverSession, phi: &Formula, syms: &[Symbol]) -> Result<AffineHull, SolverError> {
    affine_hull_with(session, phi, syms, |_| Ok(()))
}

/// As [`affine_hull`], with `setup` run after `phi` is asserted to add
/// further context (declarations, raw assertions) to the hull query.
pub fn affine_hull_with<F>(
    session: &mut SolverSession,
    phi: &Formula,
    syms: &[Symbol],
    mut setup: F,
) -> Result<AffineHull, SolverError>
where
    F: FnMut(&mut SolverSession) -> Result<(), SolverError>,
{
    let mut hull = AffineSystem::bottom(syms.to_vec());
    let mut iterations = 0;
    let outcome = (|| -> Result<(), SolverError> {
        session.reset()?;
        session.assert(phi)?;
        setup(session)?;
        loop {
            match session.check()? {
                SatResult::Unsat => return Ok(()),
                SatResult::Unknown => return Err(session.unknown_error()),
                SatResult::Sat => {}
            }
            iterations += 1;
            let m = session.model_for(syms)?;
            hull = hull.join(&AffineSystem::point(syms.to_vec(), &model_point(&m, syms)));
            session.assert(&hull.to_formula().negate())?;
        }
    })();
    match outcome {
        Ok(()) => Ok(AffineHull {
            hull,
            iterations,
            partial: false,
        }),
        Err(SolverError::Spawn(..)) | Err(SolverError::Protocol(_)) => outcome.map(|_| unreachable!()),
        Err(_) => {
            // keep only equations that can be re-verified
            let mut kept = Vec::new();
            if !hull.is_bottom() {
                for (a, b) in hull.equations() {
                    if session.entails(phi, &hull.equation_formula(&a, &b)).unwrap_or(false) {
                        kept.push((a, b));
                    }
                }
            }
            Ok(AffineHull {
                hull: AffineSystem::from_equations(syms.to_vec(), kept),
                iterations,
                partial: true,
            })
        }
    }
}
