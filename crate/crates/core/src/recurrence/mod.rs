//! The iteration operator: recurrence equations and inequations of a loop
//! body, their closed forms, loop guards, and the resulting loop summary.

mod closed;
mod detect;
mod star;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::formula::{Formula, Rel, Term, Var};
use crate::polyhedra::DEFAULT_BUDGET;
use crate::Rational;

pub use closed::{close, ClosedForm};
pub use detect::{recurrence_inequations, simple_recurrences, stratified_recurrences};
pub use star::{guard, plus, star, Lra, StarSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GuardStrategy {
    Hull,
    Interval,
    None,
}

impl FromStr for GuardStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hull" => Ok(GuardStrategy::Hull),
            "interval" => Ok(GuardStrategy::Interval),
            "none" => Ok(GuardStrategy::None),
            _ => Err(format!("unknown guard strategy `{s}` (expected hull, interval or none)")),
        }
    }
}

impl fmt::Display for GuardStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GuardStrategy::Hull => "hull",
            GuardStrategy::Interval => "interval",
            GuardStrategy::None => "none",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationConfig {
    pub guard: GuardStrategy,
    /// Highest stratum searched; `None` means the number of variables.
    pub max_stratum: Option<usize>,
    pub stratified: bool,
    pub inequations: bool,
    /// Linearize non-linear loop bodies; otherwise they are summarized by
    /// their guard alone.
    pub linearize_before_star: bool,
    /// Constraint budget for polyhedral projection.
    pub budget: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            guard: GuardStrategy::Hull,
            max_stratum: None,
            stratified: true,
            inequations: true,
            linearize_before_star: true,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecurrenceKind {
    Simple,
    Stratified,
    Inequation,
}

/// `c·x′ ⋈ c·x + b·y + d`, where the `y` are induction variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recurrence {
    pub kind: RecurrenceKind,
    pub lhs: BTreeMap<Var, Rational>,
    pub rel: Rel,
    pub iv: BTreeMap<Var, Rational>,
    pub constant: Rational,
    pub stratum: usize,
}

impl Recurrence {
    /// `x′ = x + b·y + d` for a single variable.
    pub fn equation(kind: RecurrenceKind, x: Var, iv: BTreeMap<Var, Rational>, constant: Rational, stratum: usize) -> Self {
        Recurrence {
            kind,
            lhs: BTreeMap::from([(x, Rational::one())]),
            rel: Rel::Eq,
            iv: iv.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            constant,
            stratum,
        }
    }

    /// The variable of a single-variable equation.
    pub fn var(&self) -> Option<&Var> {
        match (self.rel, self.lhs.len()) {
            (Rel::Eq, 1) => self.lhs.keys().next(),
            _ => None,
        }
    }

    /// Increment-0 equation `x′ = x`.
    pub fn is_stable(&self) -> bool {
        self.var().is_some() && self.iv.is_empty() && self.constant.is_zero()
    }

    fn sides(&self) -> (Term, Term) {
        let post = Term::linear(self.lhs.iter().map(|(v, c)| (v.post(), c.clone())), Rational::zero());
        let pre = Term::linear(
            self.lhs
                .iter()
                .map(|(v, c)| (v.pre(), c.clone()))
                .chain(self.iv.iter().map(|(v, c)| (v.pre(), c.clone()))),
            self.constant.clone(),
        );
        (post, pre)
    }

    /// The recurrence as a formula over pre- and post-state symbols.
    pub fn to_formula(&self) -> Formula {
        let (post, pre) = self.sides();
        match self.rel {
            Rel::Eq => Formula::eq(post, pre),
            Rel::Le => Formula::le(post, pre),
            Rel::Lt => Formula::lt(post, pre),
        }
    }
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (post, pre) = self.sides();
        write!(f, "{} {} {}", post, self.rel.as_str(), pre)
    }
}

fn fmt_coeff_vec(f: &mut fmt::Formatter<'_>, items: &[(String, Rational)]) -> fmt::Result {
    for (i, (name, c)) in items.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        match (i, neg) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        if mag.is_one() {
            write!(f, "{name}")?;
        } else {
            write!(f, "{mag}*{name}")?;
        }
    }
    Ok(())
}
