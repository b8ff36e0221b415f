use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use super::*;
use crate::formula::{parse_formula, rat, Formula, Symbol, Var};
use crate::smt::{Model, SolverConfig, SolverSession};
use crate::Rational;

fn session() -> SolverSession {
    SolverSession::new(SolverConfig::default()).expect("z3 on PATH")
}

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn pre(n: &str) -> Symbol {
    Var::new(n).pre()
}

fn post(n: &str) -> Symbol {
    Var::new(n).post()
}

fn poly(s: &str) -> Polyhedron {
    let g = f(s);
    Polyhedron::from_atoms(g.atoms())
}

fn equivalent(s: &mut SolverSession, a: &Formula, b: &Formula) -> bool {
    s.entails(a, b).unwrap() && s.entails(b, a).unwrap()
}

#[test]
fn affine_join_of_two_points_is_a_line() {
    let syms = vec![pre("x"), pre("y")];
    let p = AffineSystem::point(syms.clone(), &[rat(1), rat(2)]);
    let q = AffineSystem::point(syms.clone(), &[rat(3), rat(4)]);
    let j = p.join(&q);
    assert_eq!(j.num_equations(), 1);
    // oracle: the line through (1,2) and (3,4) is y = x + 1
    assert!(j.contains(&[rat(10), rat(11)]));
    assert!(!j.contains(&[rat(10), rat(12)]));
    assert_eq!(j.join(&AffineSystem::bottom(syms.clone())), j);
    assert_eq!(AffineSystem::bottom(syms).join(&j), j);
    assert_eq!(j.join(&j), j);
}

#[test]
fn inconsistent_equations_are_bottom() {
    let syms = vec![pre("x")];
    let h = AffineSystem::from_equations(syms, vec![(vec![rat(1)], rat(1)), (vec![rat(1)], rat(2))]);
    assert!(h.is_bottom());
}

#[test]
fn affine_hull_of_disjunction() {
    let mut s = session();
    let phi = f("(x' = x + 1 && y' = 0) || (x' = x + 1 && y' = 1)");
    let syms = vec![pre("x"), pre("y"), post("x"), post("y")];
    let h = affine_hull(&mut s, &phi, &syms).unwrap();
    assert!(!h.partial);
    assert!(h.iterations <= 2 * 2 + 1);
    assert!(equivalent(&mut s, &h.hull.to_formula(), &f("x' = x + 1")));
}

#[test]
fn affine_hull_of_increment_is_fast() {
    let mut s = session();
    let syms = vec![pre("x"), post("x")];
    let h = affine_hull(&mut s, &f("x' = x + 1"), &syms).unwrap();
    assert!(h.iterations <= 2, "{} iterations", h.iterations);
    assert!(equivalent(&mut s, &h.hull.to_formula(), &f("x' = x + 1")));
}

#[test]
fn affine_hull_of_unsat_is_bottom() {
    let mut s = session();
    let h = affine_hull(&mut s, &f("x < x"), &[pre("x")]).unwrap();
    assert!(h.hull.is_bottom());
    assert_eq!(h.iterations, 0);
}

#[test]
fn affine_hull_is_implied_and_complete() {
    let mut s = session();
    // hull known by construction: a' = a + 2b, c' = c - 1, with b free in [0, 3]
    let phi = f("a' = a + 2*b && c' = c - 1 && b' = b && 0 <= b && b <= 3 && (a > 0 || a < 5)");
    let syms: Vec<Symbol> = ["a", "b", "c"].iter().map(|n| pre(n)).chain(["a", "b", "c"].iter().map(|n| post(n))).collect();
    let h = affine_hull(&mut s, &phi, &syms).unwrap();
    assert!(h.iterations <= 2 * 3 + 1);
    let hf = h.hull.to_formula();
    // (1) implied
    assert!(s.entails(&phi, &hf).unwrap());
    // (2) random λ-combinations of the known equations are implied by H
    let known = [
        (vec![(post("a"), 1), (pre("a"), -1), (pre("b"), -2)], 0),
        (vec![(post("c"), 1), (pre("c"), -1)], -1),
        (vec![(post("b"), 1), (pre("b"), -1)], 0),
    ];
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
    for _ in 0..50 {
        let lam: Vec<i64> = (0..3).map(|_| rand::Rng::gen_range(&mut rng, -4..=4)).collect();
        let mut coeffs: BTreeMap<Symbol, Rational> = BTreeMap::new();
        let mut rhs = 0;
        for (l, (terms, b)) in lam.iter().zip(&known) {
            for (sym, c) in terms {
                *coeffs.entry(sym.clone()).or_insert_with(|| rat(0)) += rat(l * c);
            }
            rhs += l * b;
        }
        let e = Formula::eq(
            crate::formula::Term::linear(coeffs, rat(0)),
            crate::formula::Term::int(rhs),
        );
        assert!(s.entails(&hf, &e).unwrap());
    }
    // (3) rows are independent: dropping any one loses it
    let eqs = h.hull.equations();
    for i in 0..eqs.len() {
        let rest: Vec<_> = eqs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, e)| e.clone()).collect();
        let weaker = AffineSystem::from_equations(syms.clone(), rest).to_formula();
        let (a, b) = &eqs[i];
        assert!(!s.entails(&weaker, &h.hull.equation_formula(a, b)).unwrap());
    }
}

#[test]
fn projection_by_transitivity() {
    let p = poly("x <= y && y <= z");
    let (q, stats) = p.project(&BTreeSet::from([pre("y")]), DEFAULT_BUDGET);
    assert!(!stats.interval_fallback);
    assert_eq!(q.to_formula().to_string(), "x <= z");
    let (same, _) = p.project(&BTreeSet::new(), DEFAULT_BUDGET);
    assert_eq!(same.constraints().len(), 2);
}

#[test]
fn projection_of_decrement_branch_onto_differences() {
    // then-branch cube of the two-counter loop with δx = x' - x, δy = y' - y
    let p = poly("x >= 0 && y >= 0 && x' = x - 1 && y' = y && dx = x' - x && dy = y' - y");
    let xs: BTreeSet<Symbol> = [pre("x"), pre("y"), post("x"), post("y")].into();
    let (q, _) = p.project(&xs, DEFAULT_BUDGET);
    let mut s = session();
    assert!(equivalent(&mut s, &q.to_formula(), &f("dx = -1 && dy = 0")));
}

#[test]
fn join_of_two_points_is_a_segment() {
    let a = poly("dx = -1 && dy = 0");
    let b = poly("dx = 0 && dy = -1");
    let (j, _) = a.join(&b, DEFAULT_BUDGET);
    let mut s = session();
    let expected = f("-1 <= dx && dx <= 0 && -1 <= dy && dy <= 0 && dx + dy = -1");
    assert!(equivalent(&mut s, &j.to_formula(), &expected), "{j}");
    assert_eq!(a.join(&Polyhedron::bottom(), DEFAULT_BUDGET).0, a);
    let (aa, _) = a.join(&a, DEFAULT_BUDGET);
    assert!(aa.leq(&a) && a.leq(&aa));
}

#[test]
fn budget_overflow_falls_back_to_intervals() {
    // eliminating the middle layer of a dense bipartite system multiplies constraints
    let mut parts = Vec::new();
    for i in 0..6 {
        parts.push(format!("a{i} <= m"));
        parts.push(format!("m <= b{i}"));
        parts.push(format!("0 <= a{i} && b{i} <= 10"));
    }
    let p = poly(&parts.join(" && "));
    let (q, stats) = p.project(&BTreeSet::from([pre("m")]), 8);
    assert!(stats.interval_fallback);
    // still sound: a model of p satisfies q
    let m = Model::new(
        p.symbols()
            .into_iter()
            .map(|s| (s.clone(), if s.to_string().starts_with('a') { rat(1) } else if s.to_string() == "m" { rat(2) } else { rat(3) }))
            .collect(),
    );
    assert!(m.eval_formula(&p.to_formula()).unwrap());
    assert!(m.eval_formula(&q.to_formula()).unwrap());
}

#[test]
fn convex_hull_of_two_points() {
    let mut s = session();
    let h = convex_hull(&mut s, &f("x = 0 || x = 2"), &BTreeSet::new(), DEFAULT_BUDGET).unwrap();
    assert!(!h.partial);
    assert!(equivalent(&mut s, &h.hull.to_formula(), &f("0 <= x && x <= 2")));
}

#[test]
fn convex_hull_of_two_counter_loop() {
    let mut s = session();
    let body = f(
        "x >= 0 && y >= 0 && ((x' = x - 1 && y' = y) || (x' = x && y' = y - 1)) && dx = x' - x && dy = y' - y",
    );
    let xs: BTreeSet<Symbol> = [pre("x"), pre("y"), post("x"), post("y")].into();
    let h = convex_hull(&mut s, &body, &xs, DEFAULT_BUDGET).unwrap();
    assert!(h.iterations <= 3);
    let expected = f("-1 <= dx && dx <= 0 && -1 <= dy && dy <= 0 && dx + dy = -1");
    assert!(equivalent(&mut s, &h.hull.to_formula(), &expected), "{}", h.hull);
}

#[test]
fn single_cube_hull_is_its_projection() {
    let mut s = session();
    let psi = f("x <= y && y <= z");
    let h = convex_hull(&mut s, &psi, &BTreeSet::from([pre("y")]), DEFAULT_BUDGET).unwrap();
    assert_eq!(h.iterations, 1);
    assert!(equivalent(&mut s, &h.hull.to_formula(), &f("x <= z")));
}

#[test]
fn implicant_cube_follows_model() {
    let psi = f("(a > 0 || b > 0) && c > 0");
    let m = Model::new([(pre("a"), rat(1)), (pre("b"), rat(0)), (pre("c"), rat(1))].into_iter().collect());
    let cube = implicant_cube(&psi, &m).unwrap();
    assert_eq!(Formula::and(cube.into_iter().map(Formula::Atom).collect()), f("a > 0 && c > 0"));
    let single = f("a > 0 && c > 0");
    let cube = implicant_cube(&single, &m).unwrap();
    assert_eq!(Formula::and(cube.into_iter().map(Formula::Atom).collect()), single);
    let miss = Model::new([(pre("a"), rat(0)), (pre("b"), rat(0)), (pre("c"), rat(1))].into_iter().collect());
    assert_eq!(implicant_cube(&psi, &miss), None);
}

#[test]
fn implicant_cube_entails_formula() {
    let mut s = session();
    let body = f("x >= 0 && y >= 0 && ((x' = x - 1 && y' = y) || (x' = x && y' = y - 1))");
    let m = Model::new(
        [(pre("x"), rat(3)), (pre("y"), rat(3)), (post("x"), rat(2)), (post("y"), rat(3))]
            .into_iter()
            .collect(),
    );
    let cube = Formula::and(implicant_cube(&body, &m).unwrap().into_iter().map(Formula::Atom).collect());
    assert!(s.entails(&cube, &body).unwrap());
    assert!(s.entails(&cube, &f("x' = x - 1")).unwrap());
}

type Rect = (i64, i64, i64, i64);

fn rect_formula(r: &Rect) -> String {
    format!("({} <= x && x <= {} && {} <= y && y <= {})", r.0, r.0 + r.1, r.2, r.2 + r.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // oracle: the hull of integral boxes has the same support function as
    // their corner points, checked in a fan of directions
    #[test]
    fn hull_of_boxes_matches_vertex_oracle(rects in prop::collection::vec((-4i64..4, 0i64..3, -4i64..4, 0i64..3), 1..=3)) {
        let mut s = session();
        let psi = f(&rects.iter().map(rect_formula).collect::<Vec<_>>().join(" || "));
        let h = convex_hull(&mut s, &psi, &BTreeSet::new(), DEFAULT_BUDGET).unwrap();
        prop_assert!(s.entails(&psi, &h.hull.to_formula()).unwrap());
        let corners: Vec<(i64, i64)> = rects
            .iter()
            .flat_map(|r| [(r.0, r.2), (r.0 + r.1, r.2), (r.0, r.2 + r.3), (r.0 + r.1, r.2 + r.3)])
            .collect();
        for (cx, cy) in [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1), (2, 1), (1, -3), (-2, 5)] {
            let best = corners.iter().map(|(x, y)| cx * x + cy * y).max().unwrap();
            let dir: BTreeMap<Symbol, Rational> = [(pre("x"), rat(cx)), (pre("y"), rat(cy))].into();
            prop_assert_eq!(h.hull.maximize(&dir), Some(rat(best)));
        }
    }

    // any point of P, dropped onto the remaining symbols, lies in the projection
    #[test]
    fn projection_is_sound(
        cs in prop::collection::vec((prop::collection::vec(-3i64..=3, 3), -6i64..=6), 1..6),
        pt in prop::collection::vec(-3i64..=3, 3),
    ) {
        let names = ["u", "v", "w"];
        let atoms: Vec<String> = cs.iter().map(|(a, b)| {
            format!("{}*u + {}*v + {}*w <= {}", a[0], a[1], a[2], b)
        }).collect();
        let p = poly(&atoms.join(" && "));
        let m = Model::new(names.iter().zip(&pt).map(|(n, v)| (pre(n), rat(*v))).collect());
        if m.eval_formula(&p.to_formula()).unwrap() {
            let (q, _) = p.project(&BTreeSet::from([pre("v")]), DEFAULT_BUDGET);
            prop_assert!(m.eval_formula(&q.to_formula()).unwrap());
            let (r, _) = p.project(&BTreeSet::from([pre("v")]), 1);
            prop_assert!(m.eval_formula(&r.to_formula()).unwrap());
        }
    }
}
