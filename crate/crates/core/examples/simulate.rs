//! Runs a program on random inputs and tallies the outcomes.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lra::analyzer::{random_state, simulate, SimOutcome};
use lra::lang::{build_cfa, parse};

fn main() {
    let src = "var x, y; y := 0; while (x > 0) { x := x - 1; y := y + 1; } assert(y <= 10);";
    let cfa = build_cfa(&parse(src).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..200 {
        let init = random_state(&cfa, &mut rng, 20);
        let run = simulate(&cfa, init, &mut rng, 1_000, 20);
        let key = match run.outcome {
            SimOutcome::AssertViolation { line } => format!("violation at line {line}"),
            other => format!("{other:?}").to_lowercase(),
        };
        *tally.entry(key).or_default() += 1;
    }
    for (k, n) in tally {
        println!("{n:>4}  {k}");
    }
}
