use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::lang::{eval_bool, eval_expr, Cfa, EdgeLabel, Env, RuntimeError, Vertex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimOutcome {
    /// Reached the exit vertex.
    Terminated,
    AssertViolation { line: usize },
    /// No edge can fire outside the exit (a failed `assume` or loop test).
    Blocked,
    StepLimit,
    Error(RuntimeError),
}

#[derive(Clone, Debug)]
pub struct SimRun {
    pub outcome: SimOutcome,
    pub init: Env,
    /// States after each step, starting with `init`.
    pub states: Vec<Env>,
    /// Vertices visited, starting with the entry.
    pub trace: Vec<Vertex>,
}

impl SimRun {
    pub fn final_state(&self) -> &Env {
        self.states.last().expect("at least the initial state")
    }
}

/// Uniform state over `[-range, range]` for every variable of `cfa`.
pub fn random_state(cfa: &Cfa, rng: &mut ChaCha8Rng, range: i64) -> Env {
    cfa.vars
        .iter()
        .map(|v| (v.name().to_string(), BigInt::from(rng.gen_range(-range..=range))))
        .collect()
}

/// Runs `cfa` from `init`, resolving nondeterministic branches and havocs
/// with `rng` (havoc values drawn from `[-havoc_range, havoc_range]`).
pub fn simulate(cfa: &Cfa, init: Env, rng: &mut ChaCha8Rng, max_steps: usize, havoc_range: i64) -> SimRun {
    let mut env = init.clone();
    let mut run = SimRun {
        outcome: SimOutcome::StepLimit,
        init,
        states: vec![env.clone()],
        trace: vec![cfa.entry],
    };
    let mut v = cfa.entry;
    for _ in 0..=max_steps {
        if let Some(a) = cfa.assert_points.get(&v) {
            match eval_bool(&a.cond, &env) {
                Ok(true) => {}
                Ok(false) => {
                    run.outcome = SimOutcome::AssertViolation { line: a.line };
                    return run;
                }
                Err(e) => {
                    run.outcome = SimOutcome::Error(e);
                    return run;
                }
            }
        }
        if run.states.len() > max_steps {
            return run;
        }
        let mut enabled = Vec::new();
        for e in cfa.out_edges(v) {
            match &e.label {
                EdgeLabel::Assume(b) => match eval_bool(b, &env) {
                    Ok(true) => enabled.push(e),
                    Ok(false) => {}
                    Err(err) => {
                        run.outcome = SimOutcome::Error(err);
                        return run;
                    }
                },
                _ => enabled.push(e),
            }
        }
        let Some(e) = enabled.choose(rng) else {
            run.outcome = if v == cfa.exit { SimOutcome::Terminated } else { SimOutcome::Blocked };
            return run;
        };
        match &e.label {
            EdgeLabel::Assign(x, expr) => match eval_expr(expr, &env) {
                Ok(val) => {
                    env.insert(x.name().to_string(), val);
                }
                Err(err) => {
                    run.outcome = SimOutcome::Error(err);
                    return run;
                }
            },
            EdgeLabel::Havoc(x) => {
                env.insert(x.name().to_string(), BigInt::from(rng.gen_range(-havoc_range..=havoc_range)));
            }
            EdgeLabel::Assume(_) => {}
        }
        v = e.dst;
        run.states.push(env.clone());
        run.trace.push(v);
    }
    run
}
