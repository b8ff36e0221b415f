//! Surface language: parsing, pretty printing, control flow automata and a
//! reference interpreter.

mod ast;
mod cfa;
mod interp;
mod parser;
mod pretty;

pub use ast::*;
pub use cfa::{build_cfa, AssertPoint, Cfa, Edge, EdgeId, EdgeLabel, Vertex};
pub use interp::{eval_bool, eval_expr, run_program, AstOutcome, AstRun, Choices, Env, RuntimeError};
pub use parser::{parse, parse_bool_expr, parse_expr, ParseError};
pub use pretty::{bool_to_string, expr_to_string, pretty};
