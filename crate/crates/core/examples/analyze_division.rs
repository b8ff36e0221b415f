//! Proves the quotient/remainder invariant of a nested-loop division program.
//!
//! ```bash
//! cargo run --example analyze_division
//! ```

use lra::analyzer::{analyze, AnalysisConfig};

const PROGRAM: &str = "var x, y, q, r, t;
r := x;
q := 0;
while (r >= y) {
  t := y;
  while (t != 0) {
    r := r - 1;
    t := t - 1;
  }
  q := q + 1;
}
assert(x = q*y + r);
";

fn main() {
    let cfg = AnalysisConfig {
        dump_recurrences: true,
        ..AnalysisConfig::default()
    };
    let report = analyze("division", PROGRAM, &cfg).expect("analysis");
    print!("{}", report.render());
}
