use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{fmt_coeff_vec, Recurrence};
use crate::formula::{Formula, Rel, Symbol, Term, Var};
use crate::linalg::{sum_closed_form, PolyInK};
use crate::Rational;

/// `c·x⁽ᵏ⁾ ⋈ Σ p_v(k)·v⁽⁰⁾ + p(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub lhs: BTreeMap<Var, Rational>,
    pub rel: Rel,
    pub init: BTreeMap<Var, PolyInK>,
    pub constant: PolyInK,
}

impl ClosedForm {
    /// Closed form of an induction variable that never changes.
    fn stable(x: &Var) -> Self {
        ClosedForm {
            lhs: BTreeMap::from([(x.clone(), Rational::one())]),
            rel: Rel::Eq,
            init: BTreeMap::from([(x.clone(), PolyInK::constant(Rational::one()))]),
            constant: PolyInK::zero(),
        }
    }

    /// Value of the right-hand side after `k` iterations from `init`.
    pub fn rhs_at(&self, k: i64, init: &BTreeMap<Var, Rational>) -> Rational {
        let mut acc = self.constant.eval_at(k);
        for (v, p) in &self.init {
            acc += p.eval_at(k) * init.get(v).cloned().unwrap_or_else(Rational::zero);
        }
        acc
    }

    pub fn lhs_at(&self, state: &BTreeMap<Var, Rational>) -> Rational {
        self.lhs
            .iter()
            .map(|(v, c)| c * state.get(v).cloned().unwrap_or_else(Rational::zero))
            .sum()
    }

    /// Does the closed form relate `init` to `state` after `k` iterations?
    pub fn holds(&self, k: i64, init: &BTreeMap<Var, Rational>, state: &BTreeMap<Var, Rational>) -> bool {
        let l = self.lhs_at(state);
        let r = self.rhs_at(k, init);
        match self.rel {
            Rel::Eq => l == r,
            Rel::Le => l <= r,
            Rel::Lt => l < r,
        }
    }

    /// The closed form with `x⁽ᵏ⁾ ↦ x′`, `x⁽⁰⁾ ↦ x` and the iteration count `k`.
    pub fn instantiate(&self, k: &Symbol) -> Formula {
        let post = Term::linear(self.lhs.iter().map(|(v, c)| (v.post(), c.clone())), Rational::zero());
        let kt = Term::sym(k.clone());
        let poly = |p: &PolyInK| -> Term {
            let mut acc = Term::zero();
            let mut pow = Term::one();
            for c in p.coeffs() {
                acc = acc + pow.scale(c);
                pow = pow.mul(&kt);
            }
            acc
        };
        let mut rhs = poly(&self.constant);
        for (v, p) in &self.init {
            rhs = rhs + poly(p).mul(&Term::sym(v.pre()));
        }
        match self.rel {
            Rel::Eq => Formula::eq(post, rhs),
            Rel::Le => Formula::le(post, rhs),
            Rel::Lt => Formula::lt(post, rhs),
        }
    }

    /// Highest power of `k` occurring.
    pub fn degree(&self) -> usize {
        self.init
            .values()
            .chain(std::iter::once(&self.constant))
            .filter_map(PolyInK::degree)
            .max()
            .unwrap_or(0)
    }
}

/// Sign and magnitude text of a polynomial; negative only if every
/// coefficient is.
fn signed(p: &PolyInK) -> (bool, String) {
    let neg = p.coeffs().iter().all(|c| !c.is_positive());
    let mag = if neg { p.scale(&-Rational::one()) } else { p.clone() };
    (neg, mag.to_string())
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<(String, Rational)> = self.lhs.iter().map(|(v, c)| (format!("{v}[k]"), c.clone())).collect();
        fmt_coeff_vec(f, &lhs)?;
        write!(f, " {} ", self.rel.as_str())?;
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (v, p) in &self.init {
            if p.is_zero() {
                continue;
            }
            let (neg, text) = signed(p);
            let text = match p.degree() {
                Some(0) if text == "1" => format!("{v}[0]"),
                Some(0) => format!("{text}*{v}[0]"),
                _ if p.coeffs().iter().filter(|c| !c.is_zero()).count() == 1 => format!("{text}*{v}[0]"),
                _ => format!("({text})*{v}[0]"),
            };
            parts.push((neg, text));
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(signed(&self.constant));
        }
        for (i, (neg, text)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => write!(f, "-{text}")?,
                (0, false) => write!(f, "{text}")?,
                (_, true) => write!(f, " - {text}")?,
                (_, false) => write!(f, " + {text}")?,
            }
        }
        Ok(())
    }
}

/// Closed form of a recurrence whose induction variables all have closed
/// forms in `lower` (keyed by variable).
pub fn close(r: &Recurrence, lower: &BTreeMap<Var, ClosedForm>) -> ClosedForm {
    if r.is_stable() {
        return ClosedForm::stable(r.var().unwrap());
    }
    // increment at iteration i: Σ_y b_y·y⁽ⁱ⁾ + d as polynomials in i
    let mut inc: BTreeMap<Var, PolyInK> = BTreeMap::new();
    let mut inc_const = PolyInK::constant(r.constant.clone());
    for (y, b) in &r.iv {
        let cf = lower.get(y).expect("induction variable without closed form");
        for (v, p) in &cf.init {
            let e = inc.entry(v.clone()).or_insert_with(PolyInK::zero);
            *e = e.add(&p.scale(b));
        }
        inc_const = inc_const.add(&cf.constant.scale(b));
    }
    let mut init: BTreeMap<Var, PolyInK> = r
        .lhs
        .iter()
        .map(|(v, c)| (v.clone(), PolyInK::constant(c.clone())))
        .collect();
    for (v, p) in inc {
        let s = sum_closed_form(&p);
        let e = init.entry(v).or_insert_with(PolyInK::zero);
        *e = e.add(&s);
    }
    init.retain(|_, p| !p.is_zero());
    ClosedForm {
        lhs: r.lhs.clone(),
        rel: r.rel,
        init,
        constant: sum_closed_form(&inc_const),
    }
}
