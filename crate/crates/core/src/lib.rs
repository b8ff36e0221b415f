pub mod analyzer;
pub mod formula;
pub mod lang;
pub mod linalg;
pub mod linearize;
pub mod pathexpr;
pub mod polyhedra;
pub mod recurrence;
pub mod smt;

pub type Rational = num_rational::BigRational;
