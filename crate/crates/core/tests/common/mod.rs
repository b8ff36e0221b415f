#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lra::formula::{Formula, Term, Var};
use lra::smt::{SatResult, SolverConfig, SolverSession};

pub fn session() -> SolverSession {
    SolverSession::new(SolverConfig::default()).expect("solver available")
}

pub fn vars(names: &[&str]) -> Arc<[Var]> {
    names.iter().map(|n| Var::new(n)).collect()
}

/// State pairs of `phi`: up to `n` models, each projected onto `vs ∪ vs′`.
pub fn state_pairs(s: &mut SolverSession, phi: &Formula, vs: &[Var], n: usize) -> Vec<(BTreeMap<Var, i64>, BTreeMap<Var, i64>)> {
    let mut out = Vec::new();
    let mut blocked = vec![phi.clone()];
    for _ in 0..n {
        let Some(m) = s.get_model(&Formula::and(blocked.clone())).unwrap() else {
            break;
        };
        let value = |sym: &lra::formula::Symbol| -> i64 {
            m.get(sym).map_or(0, |r| r.to_integer().try_into().unwrap())
        };
        let pre: BTreeMap<Var, i64> = vs.iter().map(|v| (v.clone(), value(&v.pre()))).collect();
        let post: BTreeMap<Var, i64> = vs.iter().map(|v| (v.clone(), value(&v.post()))).collect();
        let pin = Formula::and(
            pre.iter()
                .map(|(v, k)| Formula::eq(Term::sym(v.pre()), Term::int(*k)))
                .chain(post.iter().map(|(v, k)| Formula::eq(Term::sym(v.post()), Term::int(*k))))
                .collect(),
        );
        blocked.push(pin.negate());
        out.push((pre, post));
    }
    out
}

/// Equivalence over state pairs, tested on models of either side and on
/// random pairs with values in `[-6, 6]`.
pub fn agree(s: &mut SolverSession, a: &Formula, b: &Formula, vs: &[Var], seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = state_pairs(s, a, vs, 12);
    pairs.extend(state_pairs(s, b, vs, 12));
    for _ in 0..24 {
        let mut draw = || vs.iter().map(|v| (v.clone(), rng.gen_range(-6..=6))).collect::<BTreeMap<Var, i64>>();
        let pre = draw();
        let post = draw();
        pairs.push((pre, post));
    }
    for (pre, post) in &pairs {
        let (x, y) = (admits(s, a, pre, post), admits(s, b, pre, post));
        if x != y {
            return Err(format!("{pre:?} -> {post:?}: {x} vs {y}"));
        }
    }
    Ok(())
}

/// Is `(pre, post)` a model of `phi` for some choice of its auxiliary symbols?
pub fn admits(s: &mut SolverSession, phi: &Formula, pre: &BTreeMap<Var, i64>, post: &BTreeMap<Var, i64>) -> bool {
    let mut parts = vec![phi.clone()];
    for (v, n) in pre {
        parts.push(Formula::eq(Term::sym(v.pre()), Term::int(*n)));
    }
    for (v, n) in post {
        parts.push(Formula::eq(Term::sym(v.post()), Term::int(*n)));
    }
    s.check_sat(&Formula::and(parts)).unwrap() == SatResult::Sat
}
