//! Path expressions for every vertex of a small CFA.

use lra::lang::{build_cfa, parse};
use lra::pathexpr::path_expression;

fn main() {
    let p = parse("var i, n; i := 0; while (i < n) { if (*) { i := i + 1; } else { i := i + 2; } }").unwrap();
    let cfa = build_cfa(&p);
    for v in 0..cfa.num_vertices {
        match path_expression(&cfa, v) {
            Ok(pe) => println!("v{v}: {}", pe.render(&cfa)),
            Err(e) => println!("v{v}: {e}"),
        }
    }
}
