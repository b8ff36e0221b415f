use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::matrix::RationalMatrix;
use crate::Rational;

/// Univariate polynomial in the iteration counter `k`, coefficients from
/// the constant term upwards.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PolyInK {
    coeffs: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("no polynomial of degree at most {0} fits the points")]
    InconsistentPoints(usize),
}

impl PolyInK {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyInK { coeffs }
    }

    pub fn zero() -> Self {
        PolyInK { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `k`.
    pub fn k() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, k: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * k + c)
    }

    pub fn eval_at(&self, k: i64) -> Rational {
        self.eval(&Rational::from_integer(k.into()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &PolyInK) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Rational::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + other.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn mul(&self, other: &PolyInK) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }
}

impl fmt::Display for PolyInK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            first = false;
            let mono = match d {
                0 => String::new(),
                1 => "k".into(),
                _ => format!("k^{d}"),
            };
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

/// Exact interpolation of `points` by a polynomial of degree at most `degree`.
pub fn fit_polynomial(points: &[(Rational, Rational)], degree: usize) -> Result<PolyInK, FitError> {
    let mut ks: Vec<&Rational> = points.iter().map(|(k, _)| k).collect();
    ks.sort();
    ks.dedup();
    if ks.len() < degree + 1 {
        return Err(FitError::TooFewPoints {
            needed: degree + 1,
            got: ks.len(),
        });
    }
    let rows = points
        .iter()
        .map(|(k, _)| {
            let mut row = Vec::with_capacity(degree + 1);
            let mut p = Rational::one();
            for _ in 0..=degree {
                row.push(p.clone());
                p *= k;
            }
            row
        })
        .collect();
    let vandermonde = RationalMatrix::from_rows(degree + 1, rows);
    let values: Vec<Rational> = points.iter().map(|(_, v)| v.clone()).collect();
    vandermonde
        .solve(&values)
        .map(PolyInK::new)
        .ok_or(FitError::InconsistentPoints(degree))
}

/// `q(k) = Σ_{i=0}^{k−1} p(i)`, fitted on the prefix sums at `k = 0..m+1`.
pub fn sum_closed_form(p: &PolyInK) -> PolyInK {
    let Some(m) = p.degree() else {
        return PolyInK::zero();
    };
    let mut acc = Rational::zero();
    let mut points = Vec::with_capacity(m + 2);
    for k in 0..=(m as i64 + 1) {
        points.push((Rational::from_integer(k.into()), acc.clone()));
        acc += p.eval_at(k);
    }
    fit_polynomial(&points, m + 1).expect("prefix sums of a polynomial are polynomial")
}
