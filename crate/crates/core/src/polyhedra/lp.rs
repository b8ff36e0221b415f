//! Exact rational linear programming (two-phase tableau simplex, Bland's rule).

use num_traits::{One, Signed, Zero};

use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpRel {
    Le,
    Eq,
}

/// `coeffs · x (≤ | =) rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpRow {
    pub coeffs: Vec<Rational>,
    pub rel: LpRel,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal(Rational),
}

struct Tableau {
    rows: Vec<Vec<Rational>>, // last entry is the right-hand side
    basis: Vec<usize>,
    width: usize, // number of structural columns
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rational::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · y` from the current feasible basis. Returns false if
    /// unbounded. Dantzig's rule, switching to Bland's after a run of
    /// degenerate pivots.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        let mut reduced: Vec<Rational> = (0..allowed)
            .map(|j| {
                let z: Rational = self.basis.iter().zip(&self.rows).map(|(&b, row)| &cost[b] * &row[j]).sum();
                &cost[j] - z
            })
            .collect();
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate > 2 * self.rows.len() + 8;
            let mut entering: Option<usize> = None;
            for (j, d) in reduced.iter().enumerate() {
                if !d.is_positive() {
                    continue;
                }
                match entering {
                    None => entering = Some(j),
                    Some(e) if !bland && *d > reduced[e] => entering = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.width] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = best else { return false };
            if ratio.is_zero() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            let f = reduced[c].clone();
            for (d, p) in reduced.iter_mut().zip(&self.rows[r]) {
                if !p.is_zero() {
                    *d -= &f * p;
                }
            }
        }
    }

    fn value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rows)
            .map(|(&b, row)| &cost[b] * &row[self.width])
            .sum()
    }
}

/// Maximizes `obj · x` over free variables `x` subject to `rows`.
pub fn maximize(obj: &[Rational], rows: &[LpRow]) -> LpOutcome {
    match maximize_at(obj, rows) {
        Ok((v, _)) => LpOutcome::Optimal(v),
        Err(o) => o,
    }
}

/// As [`maximize`], also returning an optimal point.
pub fn maximize_at(obj: &[Rational], rows: &[LpRow]) -> Result<(Rational, Vec<Rational>), LpOutcome> {
    let n = obj.len();
    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.rel == LpRel::Le).count();
    let structural = 2 * n + slacks;
    // rows whose slack cannot start in the basis get an artificial column
    let needs_artificial = |r: &LpRow| r.rel == LpRel::Eq || r.rhs.is_negative();
    let artificials = rows.iter().filter(|r| needs_artificial(r)).count();
    let width = structural + artificials;
    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let mut slack = 2 * n;
    let mut artificial = structural;
    for r in rows {
        assert_eq!(r.coeffs.len(), n);
        let mut row = vec![Rational::zero(); width + 1];
        for (j, a) in r.coeffs.iter().enumerate() {
            row[j] = a.clone();
            row[n + j] = -a.clone();
        }
        if r.rel == LpRel::Le {
            row[slack] = Rational::one();
            slack += 1;
        }
        row[width] = r.rhs.clone();
        if needs_artificial(r) {
            if r.rhs.is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[artificial] = Rational::one();
            t.basis.push(artificial);
            artificial += 1;
        } else {
            t.basis.push(slack - 1);
        }
        t.rows.push(row);
    }

    // phase 1: drive artificials to zero
    if artificials > 0 {
        let mut cost1 = vec![Rational::zero(); width];
        for c in cost1.iter_mut().skip(structural) {
            *c = -Rational::one();
        }
        t.optimize(&cost1, width);
        if t.value(&cost1).is_negative() {
            return Err(LpOutcome::Infeasible);
        }
    }
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= structural {
            match (0..structural).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    for row in t.rows.iter_mut() {
        let rhs = row[width].clone();
        row.truncate(structural);
        row.push(rhs);
    }
    t.width = structural;

    let mut cost2 = vec![Rational::zero(); structural];
    for (j, c) in obj.iter().enumerate() {
        cost2[j] = c.clone();
        cost2[n + j] = -c.clone();
    }
    if !t.optimize(&cost2, structural) {
        return Err(LpOutcome::Unbounded);
    }
    let mut x = vec![Rational::zero(); n];
    for (&b, row) in t.basis.iter().zip(&t.rows) {
        if b < n {
            x[b] += &row[structural];
        } else if b < 2 * n {
            x[b - n] -= &row[structural];
        }
    }
    Ok((t.value(&cost2), x))
}

pub fn feasible(n: usize, rows: &[LpRow]) -> bool {
    maximize(&vec![Rational::zero(); n], rows) != LpOutcome::Infeasible
}
