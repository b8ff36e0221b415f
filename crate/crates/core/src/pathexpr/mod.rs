//! Path expressions: regular expressions over CFA edges describing every
//! path from the entry to a vertex, and their evaluation in an interpretation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lang::{Cfa, Edge, EdgeId, Vertex};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PathExpr {
    Empty,
    Epsilon,
    Edge(EdgeId),
    Cat(Arc<PathExpr>, Arc<PathExpr>),
    Alt(Arc<PathExpr>, Arc<PathExpr>),
    /// Iteration; carries the loop header it was produced for, if any.
    Star(Arc<PathExpr>, Option<Vertex>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("vertex {0} is not reachable from the entry")]
    UnreachableTarget(Vertex),
}

impl PathExpr {
    pub fn edge(e: EdgeId) -> PathExpr {
        PathExpr::Edge(e)
    }

    pub fn cat(a: PathExpr, b: PathExpr) -> PathExpr {
        match (a, b) {
            (PathExpr::Empty, _) | (_, PathExpr::Empty) => PathExpr::Empty,
            (PathExpr::Epsilon, e) | (e, PathExpr::Epsilon) => e,
            (a, b) => PathExpr::Cat(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn alt(a: PathExpr, b: PathExpr) -> PathExpr {
        match (a, b) {
            (PathExpr::Empty, e) | (e, PathExpr::Empty) => e,
            (a, b) if a == b => a,
            (a, b) => PathExpr::Alt(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn star(a: PathExpr, header: Option<Vertex>) -> PathExpr {
        match a {
            PathExpr::Empty | PathExpr::Epsilon => PathExpr::Epsilon,
            a => PathExpr::Star(Arc::new(a), header),
        }
    }

    /// Number of nodes, shared subterms counted once per occurrence.
    pub fn size(&self) -> usize {
        match self {
            PathExpr::Empty | PathExpr::Epsilon | PathExpr::Edge(_) => 1,
            PathExpr::Cat(a, b) | PathExpr::Alt(a, b) => 1 + a.size() + b.size(),
            PathExpr::Star(a, _) => 1 + a.size(),
        }
    }

    /// Edge ids occurring in the expression.
    pub fn edges(&self) -> BTreeSet<EdgeId> {
        let mut out = BTreeSet::new();
        self.edges_into(&mut out);
        out
    }

    fn edges_into(&self, out: &mut BTreeSet<EdgeId>) {
        match self {
            PathExpr::Empty | PathExpr::Epsilon => {}
            PathExpr::Edge(e) => {
                out.insert(*e);
            }
            PathExpr::Cat(a, b) | PathExpr::Alt(a, b) => {
                a.edges_into(out);
                b.edges_into(out);
            }
            PathExpr::Star(a, _) => a.edges_into(out),
        }
    }

    /// Text form with `.`, `+`, `*`, edges written `<src,dst>`.
    pub fn render(&self, cfa: &Cfa) -> String {
        let mut s = String::new();
        self.render_into(&mut s, &|e| {
            let e = cfa.edge(e);
            format!("<{},{}>", e.src, e.dst)
        }, 0);
        s
    }

    fn render_into(&self, out: &mut String, name: &dyn Fn(EdgeId) -> String, prec: u8) {
        match self {
            PathExpr::Empty => out.push('0'),
            PathExpr::Epsilon => out.push('1'),
            PathExpr::Edge(e) => out.push_str(&name(*e)),
            PathExpr::Alt(a, b) => {
                if prec > 0 {
                    out.push('(');
                }
                a.render_into(out, name, 0);
                out.push_str(" + ");
                b.render_into(out, name, 0);
                if prec > 0 {
                    out.push(')');
                }
            }
            PathExpr::Cat(a, b) => {
                if prec > 1 {
                    out.push('(');
                }
                a.render_into(out, name, 1);
                out.push('.');
                b.render_into(out, name, 1);
                if prec > 1 {
                    out.push(')');
                }
            }
            PathExpr::Star(a, _) => {
                a.render_into(out, name, 2);
                out.push('*');
            }
        }
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_into(&mut s, &|e| format!("e{e}"), 0);
        f.write_str(&s)
    }
}

/// Loop headers (targets of DFS back edges) in DFS preorder.
fn headers_in_preorder(cfa: &Cfa, live: &[bool]) -> Vec<Vertex> {
    let n = cfa.num_vertices;
    let mut order = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut headers = BTreeSet::new();
    let mut counter = 0;
    // iterative DFS: (vertex, next out-edge index)
    let succs: Vec<Vec<Vertex>> = (0..n)
        .map(|v| cfa.out_edges(v).map(|e| e.dst).filter(|d| live[*d]).collect())
        .collect();
    let mut stack = vec![(cfa.entry, 0usize)];
    order[cfa.entry] = counter;
    counter += 1;
    on_stack[cfa.entry] = true;
    while let Some((v, i)) = stack.pop() {
        if i < succs[v].len() {
            stack.push((v, i + 1));
            let w = succs[v][i];
            if order[w] == usize::MAX {
                order[w] = counter;
                counter += 1;
                on_stack[w] = true;
                stack.push((w, 0));
            } else if on_stack[w] {
                headers.insert(w);
            }
        } else {
            on_stack[v] = false;
        }
    }
    let mut hs: Vec<Vertex> = headers.into_iter().collect();
    hs.sort_by_key(|h| order[*h]);
    hs
}

/// Regular expression for all paths from the entry of `cfa` to `target`,
/// by state elimination. Non-header vertices go first, in ascending order,
/// then loop headers from the innermost outwards.
pub fn path_expression(cfa: &Cfa, target: Vertex) -> Result<PathExpr, PathError> {
    let n = cfa.num_vertices;
    let reach = cfa.reachable();
    if !reach[target] {
        return Err(PathError::UnreachableTarget(target));
    }
    // vertices on some entry → target path
    let mut coreach = vec![false; n];
    coreach[target] = true;
    let mut work = vec![target];
    while let Some(v) = work.pop() {
        for e in cfa.in_edges(v) {
            if !coreach[e.src] {
                coreach[e.src] = true;
                work.push(e.src);
            }
        }
    }
    let live: Vec<bool> = (0..n).map(|v| reach[v] && coreach[v]).collect();

    let start = n;
    let mut r: BTreeMap<(Vertex, Vertex), PathExpr> = BTreeMap::new();
    r.insert((start, cfa.entry), PathExpr::Epsilon);
    for e in &cfa.edges {
        if live[e.src] && live[e.dst] {
            let cur = r.remove(&(e.src, e.dst)).unwrap_or(PathExpr::Empty);
            r.insert((e.src, e.dst), PathExpr::alt(cur, PathExpr::edge(e.id)));
        }
    }

    let headers = headers_in_preorder(cfa, &live);
    let mut order: Vec<Vertex> = (0..n)
        .filter(|v| live[*v] && *v != target && !headers.contains(v))
        .collect();
    order.extend(headers.iter().rev().filter(|h| **h != target));

    for v in order {
        let loop_expr = r.remove(&(v, v)).unwrap_or(PathExpr::Empty);
        let header = headers.contains(&v).then_some(v);
        let l = PathExpr::star(loop_expr, header);
        let preds: Vec<(Vertex, PathExpr)> = r
            .iter()
            .filter(|((_, d), _)| *d == v)
            .map(|((s, _), e)| (*s, e.clone()))
            .collect();
        let succs: Vec<(Vertex, PathExpr)> = r
            .iter()
            .filter(|((s, _), _)| *s == v)
            .map(|((_, d), e)| (*d, e.clone()))
            .collect();
        r.retain(|(s, d), _| *s != v && *d != v);
        for (p, pe) in &preds {
            for (q, qe) in &succs {
                let through = PathExpr::cat(PathExpr::cat(pe.clone(), l.clone()), qe.clone());
                let cur = r.remove(&(*p, *q)).unwrap_or(PathExpr::Empty);
                r.insert((*p, *q), PathExpr::alt(cur, through));
            }
        }
    }

    let to = r.remove(&(start, target)).unwrap_or(PathExpr::Empty);
    let around = r.remove(&(target, target)).unwrap_or(PathExpr::Empty);
    let header = headers.contains(&target).then_some(target);
    Ok(PathExpr::cat(to, PathExpr::star(around, header)))
}

/// A semantic algebra in which path expressions are evaluated.
pub trait Interpretation {
    type Value: Clone;
    type Error;

    fn edge(&mut self, e: &Edge) -> Result<Self::Value, Self::Error>;
    fn seq(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, Self::Error>;
    fn choice(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, Self::Error>;
    fn star(&mut self, body: &Self::Value, header: Option<Vertex>) -> Result<Self::Value, Self::Error>;
    /// Identity of `seq` (the empty path).
    fn one(&mut self) -> Self::Value;
    /// Identity of `choice` (no path).
    fn zero(&mut self) -> Self::Value;
}

/// Evaluates path expressions, remembering the value of every subexpression
/// so that shared loops are summarized once.
pub struct Evaluator<V> {
    memo: HashMap<PathExpr, V>,
}

impl<V: Clone> Default for Evaluator<V> {
    fn default() -> Self {
        Evaluator { memo: HashMap::new() }
    }
}

impl<V: Clone> Evaluator<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cached(&self) -> usize {
        self.memo.len()
    }

    pub fn eval<I>(&mut self, pe: &PathExpr, cfa: &Cfa, interp: &mut I) -> Result<V, I::Error>
    where
        I: Interpretation<Value = V>,
    {
        if let Some(v) = self.memo.get(pe) {
            return Ok(v.clone());
        }
        let v = match pe {
            PathExpr::Empty => interp.zero(),
            PathExpr::Epsilon => interp.one(),
            PathExpr::Edge(e) => interp.edge(cfa.edge(*e))?,
            PathExpr::Cat(a, b) => {
                let a = self.eval(a, cfa, interp)?;
                let b = self.eval(b, cfa, interp)?;
                interp.seq(&a, &b)?
            }
            PathExpr::Alt(a, b) => {
                let a = self.eval(a, cfa, interp)?;
                let b = self.eval(b, cfa, interp)?;
                interp.choice(&a, &b)?
            }
            PathExpr::Star(a, h) => {
                let a = self.eval(a, cfa, interp)?;
                interp.star(&a, *h)?
            }
        };
        self.memo.insert(pe.clone(), v.clone());
        Ok(v)
    }
}

/// One-off evaluation.
pub fn evaluate<I: Interpretation>(pe: &PathExpr, cfa: &Cfa, interp: &mut I) -> Result<I::Value, I::Error> {
    Evaluator::new().eval(pe, cfa, interp)
}
