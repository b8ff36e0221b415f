//! Linear equality and convex polyhedra domains, and the model-guided
//! algorithms that abstract a formula into them.

mod affine;
mod hull;
mod lp;
mod polyhedron;

pub use affine::{affine_hull, affine_hull_with, AffineHull, AffineSystem};
pub use hull::{convex_hull, implicant_cube, ConvexHull};
pub use lp::{feasible, maximize, LpOutcome, LpRel, LpRow};
pub use polyhedron::{Constraint, Polyhedron, ProjectStats, DEFAULT_BUDGET};

#[cfg(test)]
mod tests;
