//! Runs the bundled corpus and prints the verdict table.

use std::path::Path;

use lra::analyzer::{run_corpus, AnalysisConfig};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let summary = run_corpus(&dir, &AnalysisConfig::default()).expect("corpus directory");
    print!("{}", summary.table());
    std::process::exit(summary.exit_code());
}
