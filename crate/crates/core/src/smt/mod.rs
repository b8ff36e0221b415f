//! Satisfiability, models, entailment and bound search through an external
//! SMT-LIB2 solver process.

mod sexp;
mod session;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::formula::{EvalError, Formula, Symbol, Term};
use crate::Rational;

pub use sexp::{parse_one, Parsed, Sexp};
pub use session::SolverSession;

/// Environment variable naming the default solver command.
pub const SOLVER_ENV: &str = "LRA_SOLVER";
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SolverConfig {
    /// Program and arguments. A bare program name gets `-in -smt2`.
    pub command: String,
    pub timeout_ms: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            command: std::env::var(SOLVER_ENV).unwrap_or_else(|_| "z3".to_string()),
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("cannot start solver `{0}`: {1}")]
    Spawn(String, String),
    #[error("solver timed out")]
    Timeout,
    #[error("solver returned unknown: {0}")]
    Unknown(String),
    #[error("solver crashed: {0}")]
    Crash(String),
    #[error("solver protocol error: {0}")]
    Protocol(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Unknown,
}

/// Assignment of exact values to symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    values: BTreeMap<Symbol, Rational>,
}

impl Model {
    pub fn new(values: BTreeMap<Symbol, Rational>) -> Self {
        Model { values }
    }

    pub fn get(&self, s: &Symbol) -> Option<&Rational> {
        self.values.get(s)
    }

    pub fn insert(&mut self, s: Symbol, v: Rational) {
        self.values.insert(s, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Rational)> {
        self.values.iter()
    }

    pub fn eval_term(&self, t: &Term) -> Result<Rational, EvalError> {
        t.eval(&|s: &Symbol| self.values.get(s).cloned())
    }

    pub fn eval_formula(&self, f: &Formula) -> Result<bool, EvalError> {
        f.eval(&|s: &Symbol| self.values.get(s).cloned())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (s, v)) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}: {v}")?;
        }
        write!(f, "}}")
    }
}

/// `[lo, hi]` with `None` standing for an infinite end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl Interval {
    pub fn top() -> Self {
        Interval { lo: None, hi: None }
    }

    pub fn point(v: Rational) -> Self {
        Interval {
            lo: Some(v.clone()),
            hi: Some(v),
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.lo.as_ref().is_none_or(|l| l <= v) && self.hi.as_ref().is_none_or(|h| v <= h)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            Some(l) => write!(f, "[{l}, ")?,
            None => write!(f, "[-inf, ")?,
        }
        match &self.hi {
            Some(h) => write!(f, "{h}]"),
            None => write!(f, "+inf]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, parse_term, rat, Var};
    use rand::{Rng, SeedableRng};

    fn session() -> SolverSession {
        SolverSession::new(SolverConfig::default()).expect("z3 on PATH")
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn models_satisfy_queries() {
        let mut s = session();
        let phi = f("x' = x + 1");
        let m = s.get_model(&phi).unwrap().unwrap();
        assert!(m.eval_formula(&phi).unwrap());
        assert_eq!(s.get_model(&f("x < x")).unwrap(), None);
    }

    #[test]
    fn inner_loop_body_decrements_r() {
        let mut s = session();
        let body = f("t != 0 && r' = r - 1 && t' = t - 1 && x' = x && y' = y && q' = q");
        let m = s.get_model(&body).unwrap().unwrap();
        // oracle: evaluate the difference directly from the returned values
        let d = |v: &str| m.get(&Var::new(v).post()).unwrap() - m.get(&Var::new(v).pre()).unwrap();
        assert_eq!(d("r"), rat(-1));
        assert_eq!(m.eval_term(&parse_term("t' - t").unwrap()).unwrap(), rat(-1));
    }

    #[test]
    fn eval_term_examples() {
        let m = Model::new(
            [(Var::new("x").pre(), rat(3)), (Var::new("x").post(), rat(2))]
                .into_iter()
                .collect(),
        );
        assert_eq!(m.eval_term(&parse_term("x' - x").unwrap()).unwrap(), rat(-1));
        assert_eq!(m.eval_term(&Term::int(7)).unwrap(), rat(7));
        assert_eq!(
            m.eval_term(&parse_term("x / (x - 3)").unwrap()),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn entailment_examples() {
        let mut s = session();
        assert!(s
            .entails(&f("t > 0 && r' = r - 1 && t' = t - 1"), &f("r' = r - 1"))
            .unwrap());
        assert!(!s.entails(&f("x' = x + 1"), &f("x' = x + 2")).unwrap());
    }

    #[test]
    fn bounds_examples() {
        let mut s = session();
        let i = s.optimize_bounds(&f("1 <= x && x < 4"), &parse_term("x").unwrap()).unwrap().unwrap();
        assert_eq!(i, Interval { lo: Some(rat(1)), hi: Some(rat(3)) });
        let i = s.optimize_bounds(&f("x = x"), &parse_term("x").unwrap()).unwrap().unwrap();
        assert_eq!(i, Interval::top());
        let psi = f("1 <= w && w = x && x < y && y < 5 && w*y <= z && z <= x*y");
        let y = s.optimize_bounds(&psi, &parse_term("y").unwrap()).unwrap().unwrap();
        assert_eq!(y.to_string(), "[2, 4]");
        let x = s.optimize_bounds(&psi, &parse_term("x").unwrap()).unwrap().unwrap();
        assert_eq!(x.to_string(), "[1, 3]");
        assert_eq!(s.optimize_bounds(&f("x < x"), &parse_term("x").unwrap()).unwrap(), None);
    }

    #[test]
    fn bounds_of_scaled_and_far_terms() {
        let mut s = session();
        let phi = f("0 <= a && a <= 1000000 && 3 <= b && b <= 4");
        let i = s.optimize_bounds(&phi, &parse_term("a + 2*b").unwrap()).unwrap().unwrap();
        assert_eq!(i, Interval { lo: Some(rat(6)), hi: Some(rat(1000008)) });
        let half = Term::sym(Var::new("b").pre()).scale(&Rational::new(1.into(), 2.into()));
        let i = s.optimize_bounds(&phi, &half).unwrap().unwrap();
        assert_eq!(i.to_string(), "[3/2, 2]");
        let open = s.optimize_bounds(&f("a >= 5"), &parse_term("a").unwrap()).unwrap().unwrap();
        assert_eq!(open, Interval { lo: Some(rat(5)), hi: None });
    }

    #[test]
    fn incremental_stack_and_uf() {
        let mut s = session();
        s.reset().unwrap();
        s.assert(&f("x > 0")).unwrap();
        s.push().unwrap();
        s.assert(&f("x < 0")).unwrap();
        assert_eq!(s.check().unwrap(), SatResult::Unsat);
        s.pop().unwrap();
        assert_eq!(s.check().unwrap(), SatResult::Sat);
        s.declare_fun("mul", 2).unwrap();
        s.declare(&Var::new("y").pre()).unwrap();
        s.assert_raw("(distinct (|mul| |x| |y|) (|mul| |x| |y|))").unwrap();
        assert_eq!(s.check().unwrap(), SatResult::Unsat);
        assert_eq!(s.depth(), 0);
    }

    #[test]
    fn protocol_errors_are_reported() {
        let mut s = session();
        s.reset().unwrap();
        assert!(matches!(s.assert_raw("(> |nope| 0)"), Err(SolverError::Protocol(_))));
        // the session stays usable
        assert_eq!(s.check_sat(&f("x = 1")).unwrap(), SatResult::Sat);
    }

    #[test]
    fn missing_binary_fails_to_spawn() {
        let cfg = SolverConfig {
            command: "/nonexistent/solver".into(),
            timeout_ms: 100,
        };
        assert!(matches!(SolverSession::new(cfg), Err(SolverError::Spawn(..))));
    }

    #[test]
    fn nonlinear_timeout_is_reported_not_hung() {
        let mut s = session();
        s.set_timeout(200).unwrap();
        // hard non-linear problem: sums of cubes
        let phi = f("x*x*x + y*y*y + z*z*z = 33 && x > 1000 && y > 1000");
        match s.check_sat(&phi) {
            Ok(SatResult::Unknown) | Err(SolverError::Timeout) | Ok(SatResult::Unsat) => {}
            other => panic!("unexpected {other:?}"),
        }
        s.set_timeout(10_000).unwrap();
        assert_eq!(s.check_sat(&f("x = 1")).unwrap(), SatResult::Sat);
    }

    /// Entailment claims are cross-checked against random valuations.
    #[test]
    fn entailment_agrees_with_random_valuations() {
        let mut s = session();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cases = [
            ("x' = x + 2 && y' = y", "x' - x = 2"),
            ("x >= 0 && x' = x + y && y > 0", "x' > x"),
            ("x' = 2*x && x >= 1", "x' >= x + 1"),
            ("x' = x + 1", "x' >= x + 2"),
        ];
        for (phi, psi) in cases {
            let (phi, psi) = (f(phi), f(psi));
            let claimed = s.entails(&phi, &psi).unwrap();
            let syms: Vec<Symbol> = phi.symbols().union(&psi.symbols()).cloned().collect();
            let mut counterexample = false;
            for _ in 0..1000 {
                let m = Model::new(syms.iter().map(|x| (x.clone(), rat(rng.gen_range(-8..=8)))).collect());
                if m.eval_formula(&phi).unwrap() && !m.eval_formula(&psi).unwrap() {
                    counterexample = true;
                }
            }
            if claimed {
                assert!(!counterexample);
            }
        }
    }
}
