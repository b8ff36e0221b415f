//! Exact rational linear algebra and polynomial fitting.

mod matrix;
mod poly;

pub use matrix::{dot, implied_equation, solve_lambda_system, RationalMatrix};
pub use poly::{fit_polynomial, sum_closed_form, FitError, PolyInK};
