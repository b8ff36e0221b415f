use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::ast::*;
use super::pretty::{bool_to_string, expr_to_string};
use crate::formula::Var;

pub type Vertex = usize;
pub type EdgeId = usize;

/// Statement labelling a CFA edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    Assign(Var, Expr),
    Assume(BoolExpr),
    Havoc(Var),
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Assign(v, e) => write!(f, "{} := {}", v, expr_to_string(e)),
            EdgeLabel::Assume(b) => write!(f, "[{}]", bool_to_string(b)),
            EdgeLabel::Havoc(v) => write!(f, "havoc {}", v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub src: Vertex,
    pub dst: Vertex,
    pub label: EdgeLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssertPoint {
    pub cond: BoolExpr,
    pub line: usize,
}

/// Control flow automaton with statement-labelled edges.
///
/// Assertions do not label edges: each is attached to the vertex where it is
/// checked, and control continues past it along an `[true]` edge.
#[derive(Clone, Debug)]
pub struct Cfa {
    pub vars: Arc<[Var]>,
    pub num_vertices: usize,
    pub entry: Vertex,
    pub exit: Vertex,
    pub edges: Vec<Edge>,
    pub assert_points: BTreeMap<Vertex, AssertPoint>,
    /// Loop header vertices with the source line of their `while`.
    pub loop_headers: BTreeMap<Vertex, usize>,
}

impl Cfa {
    pub fn out_edges(&self, v: Vertex) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.src == v)
    }

    pub fn in_edges(&self, v: Vertex) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.dst == v)
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Vertices reachable from the entry.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_vertices];
        let mut queue = VecDeque::from([self.entry]);
        seen[self.entry] = true;
        while let Some(v) = queue.pop_front() {
            for e in self.out_edges(v) {
                if !seen[e.dst] {
                    seen[e.dst] = true;
                    queue.push_back(e.dst);
                }
            }
        }
        seen
    }

    /// Graphviz rendering, for debugging.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph cfa {\n");
        for e in &self.edges {
            s.push_str(&format!(
                "  v{} -> v{} [label=\"{}\"];\n",
                e.src,
                e.dst,
                e.label.to_string().replace('"', "\\\"")
            ));
        }
        s.push_str("}\n");
        s
    }
}

struct Builder {
    next: Vertex,
    alias: Vec<Option<Vertex>>,
    edges: Vec<(Vertex, Vertex, EdgeLabel)>,
    asserts: Vec<(Vertex, AssertPoint)>,
    headers: Vec<(Vertex, usize)>,
}

impl Builder {
    fn vertex(&mut self) -> Vertex {
        self.alias.push(None);
        self.next += 1;
        self.next - 1
    }

    fn edge(&mut self, src: Vertex, dst: Vertex, label: EdgeLabel) {
        self.edges.push((src, dst, label));
    }

    fn find(&self, mut v: Vertex) -> Vertex {
        while let Some(w) = self.alias[v] {
            v = w;
        }
        v
    }

    /// Redirects every edge into `from` to `into`; `from` must have no out-edges.
    fn merge(&mut self, from: Vertex, into: Vertex) {
        let (from, into) = (self.find(from), self.find(into));
        if from != into {
            self.alias[from] = Some(into);
        }
    }

    fn conds(cond: &Cond) -> (BoolExpr, BoolExpr) {
        match cond {
            Cond::Nondet => (BoolExpr::True, BoolExpr::True),
            Cond::Expr(b) => (b.clone(), BoolExpr::not(b.clone())),
        }
    }

    fn block(&mut self, stmts: &[Stmt], mut cur: Vertex) -> Vertex {
        for s in stmts {
            cur = self.stmt(s, cur);
        }
        cur
    }

    fn stmt(&mut self, s: &Stmt, cur: Vertex) -> Vertex {
        match s {
            Stmt::Skip => {
                let v = self.vertex();
                self.edge(cur, v, EdgeLabel::Assume(BoolExpr::True));
                v
            }
            Stmt::Assign { var, expr } => {
                let v = self.vertex();
                self.edge(cur, v, EdgeLabel::Assign(Var::new(var), expr.clone()));
                v
            }
            Stmt::Havoc(var) => {
                let v = self.vertex();
                self.edge(cur, v, EdgeLabel::Havoc(Var::new(var)));
                v
            }
            Stmt::Assume(b) => {
                let v = self.vertex();
                self.edge(cur, v, EdgeLabel::Assume(b.clone()));
                v
            }
            Stmt::Assert { cond, span } => {
                self.asserts.push((
                    cur,
                    AssertPoint {
                        cond: cond.clone(),
                        line: span.line,
                    },
                ));
                let v = self.vertex();
                self.edge(cur, v, EdgeLabel::Assume(BoolExpr::True));
                v
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let (ct, ce) = Self::conds(cond);
                let t0 = self.vertex();
                self.edge(cur, t0, EdgeLabel::Assume(ct));
                let t1 = self.block(then_branch, t0);
                let e0 = self.vertex();
                self.edge(cur, e0, EdgeLabel::Assume(ce));
                let e1 = self.block(else_branch, e0);
                self.merge(e1, t1);
                t1
            }
            Stmt::While { cond, body, span } => {
                let (ct, ce) = Self::conds(cond);
                let header = cur;
                self.headers.push((header, span.line));
                let b0 = self.vertex();
                self.edge(header, b0, EdgeLabel::Assume(ct));
                let end = self.block(body, b0);
                self.merge(end, header);
                let out = self.vertex();
                self.edge(header, out, EdgeLabel::Assume(ce));
                out
            }
        }
    }
}

/// Compiles a structured program into its control flow automaton.
pub fn build_cfa(p: &Program) -> Cfa {
    let mut b = Builder {
        next: 0,
        alias: Vec::new(),
        edges: Vec::new(),
        asserts: Vec::new(),
        headers: Vec::new(),
    };
    let entry = b.vertex();
    let exit = b.block(&p.body, entry);

    // Renumber surviving vertices in creation order.
    let mut number = vec![usize::MAX; b.next];
    let mut count = 0;
    for v in 0..b.next {
        if b.alias[v].is_none() {
            number[v] = count;
            count += 1;
        }
    }
    let map = |v: Vertex| number[b.find(v)];
    let edges = b
        .edges
        .iter()
        .enumerate()
        .map(|(id, (s, d, l))| Edge {
            id,
            src: map(*s),
            dst: map(*d),
            label: l.clone(),
        })
        .collect();
    Cfa {
        vars: p.vars.iter().map(|v| Var::new(v)).collect(),
        num_vertices: count,
        entry: map(entry),
        exit: map(exit),
        edges,
        assert_points: b.asserts.iter().cloned().map(|(v, a)| (map(v), a)).collect(),
        loop_headers: b.headers.iter().copied().map(|(v, l)| (map(v), l)).collect(),
    }
}
