//! Transition formulas and the sequencing/choice operators of the analysis.
//!
//! Terms are rational linear combinations of [`Node`]s (symbols and
//! non-linear products, quotients, remainders). Formulas are kept in
//! negation normal form over atoms `t ⋈ 0` with `⋈ ∈ {<, ≤, =}`.

mod formula;
mod semantics;
mod symbol;
mod term;
mod text;
mod transition;

pub use formula::{Atom, CmpOp, Formula, Rel};
pub use semantics::{bool_to_formula, edge_semantics, expr_to_term};
pub use symbol::{Symbol, Var};
pub use term::{euclid_div_mod, rat, rational_to_smt, EvalError, Node, Term};
pub use text::{parse_formula, parse_term, parse_transition};
pub use transition::{propagate_equalities, stable, TransitionFormula};
