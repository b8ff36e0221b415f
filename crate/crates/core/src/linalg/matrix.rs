use std::fmt;

use num_traits::{One, Zero};

use crate::Rational;

/// Dense matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
    reduced: bool,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
            reduced: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m.reduced = true;
        m
    }

    /// Builds a matrix from rows, which must all have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            data.extend(r);
        }
        RationalMatrix {
            rows: n,
            cols,
            data,
            reduced: false,
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True when the matrix is known to be in reduced row echelon form.
    pub fn is_rref(&self) -> bool {
        self.reduced
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Reduced row echelon form with zero rows removed, and the pivot columns.
    pub fn rref_with_pivots(&self) -> (RationalMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = Rational::one() / &m[(r, c)];
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(i, j)] - &f * &m[(r, j)];
                        m[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.data.truncate(r * m.cols);
        m.rows = r;
        m.reduced = true;
        (m, pivots)
    }

    pub fn rref(&self) -> RationalMatrix {
        self.rref_with_pivots().0
    }

    pub fn rank(&self) -> usize {
        self.rref_with_pivots().1.len()
    }

    /// Basis of `{x | M·x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref_with_pivots();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Some solution of `M·x = b`, or `None` if the system is inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref_with_pivots();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r[(row, self.cols)].clone();
        }
        Some(x)
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        self.reduced = false;
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Finds `λ` with `λ·A` matching `target` on the constrained columns, and
/// returns `(λ·A, λ·b)`: an equation `c·x = d` implied by `A·x = b` whose
/// coefficients are pinned down on those columns and free elsewhere.
pub fn implied_equation(
    a: &RationalMatrix,
    b: &[Rational],
    constrained: &[(usize, Rational)],
) -> Option<(Vec<Rational>, Rational)> {
    let at = a.transpose();
    let sys = RationalMatrix::from_rows(
        a.rows(),
        constrained.iter().map(|(j, _)| at.row(*j).to_vec()).collect(),
    );
    let rhs: Vec<Rational> = constrained.iter().map(|(_, v)| v.clone()).collect();
    let lambda = sys.solve(&rhs)?;
    let c = at.mul_vec(&lambda);
    let d = dot(&lambda, b);
    Some((c, d))
}

/// Looks for a recurrence `x_i′ = x_i + Σ_{j ∈ iv} c_j·x_j + e` implied by the
/// affine system `A·x = b` over `x = [x₁…x_n, x₁′…x_n′]`.
///
/// Returns `(c, d)` with `c_i = 1`, `c_{i+n} = −1`, every other primed
/// coefficient zero and unprimed coefficients zero outside `iv ∪ {i}`.
pub fn solve_lambda_system(
    a: &RationalMatrix,
    b: &[Rational],
    i: usize,
    iv: &[usize],
    n: usize,
) -> Option<(Vec<Rational>, Rational)> {
    assert_eq!(a.cols(), 2 * n);
    let mut constrained = Vec::new();
    for j in 0..n {
        if j == i {
            constrained.push((j, Rational::one()));
            constrained.push((j + n, -Rational::one()));
        } else {
            constrained.push((j + n, Rational::zero()));
            if !iv.contains(&j) {
                constrained.push((j, Rational::zero()));
            }
        }
    }
    implied_equation(a, b, &constrained)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::rat;
    use proptest::prelude::*;

    #[test]
    fn rref_basics() {
        assert_eq!(RationalMatrix::identity(3).rref(), RationalMatrix::identity(3));
        let m = RationalMatrix::from_i64(&[&[2, 4]]);
        assert_eq!(m.rref().row(0), &[rat(1), rat(2)]);
        assert!(m.rref().is_rref());
    }

    #[test]
    fn nullspace_is_annihilated() {
        let m = RationalMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn inconsistent_systems_have_no_solution() {
        let m = RationalMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        assert_eq!(m.solve(&[rat(1), rat(2)]), None);
        let x = m.solve(&[rat(3), rat(3)]).unwrap();
        assert_eq!(&x[0] + &x[1], rat(3));
    }

    // x = [x, x′]; hull {x′ − x = 1}
    #[test]
    fn increment_recurrence_found() {
        let a = RationalMatrix::from_i64(&[&[-1, 1]]);
        let (c, d) = solve_lambda_system(&a, &[rat(1)], 0, &[], 1).unwrap();
        assert_eq!(c, vec![rat(1), rat(-1)]);
        assert_eq!(d, rat(-1));
    }

    #[test]
    fn doubling_is_not_a_recurrence() {
        // x′ − 2x = 0
        let a = RationalMatrix::from_i64(&[&[-2, 1]]);
        assert_eq!(solve_lambda_system(&a, &[rat(0)], 0, &[], 1), None);
    }

    // vars [q, r, y]; hull {q′ = q + 1, r′ = r − y, y′ = y}
    #[test]
    fn stable_variable_acts_as_lower_stratum() {
        let a = RationalMatrix::from_i64(&[
            &[-1, 0, 0, 1, 0, 0],
            &[0, -1, 1, 0, 1, 0],
            &[0, 0, -1, 0, 0, 1],
        ]);
        let b = [rat(1), rat(0), rat(0)];
        let (c, d) = solve_lambda_system(&a, &b, 1, &[0, 2], 3).unwrap();
        // r − r′ − y = 0  ⇔  r′ = r − y
        assert_eq!(c, vec![rat(0), rat(1), rat(-1), rat(0), rat(-1), rat(0)]);
        assert_eq!(d, rat(0));
        assert_eq!(solve_lambda_system(&a, &b, 1, &[0], 3), None);
    }

    fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RationalMatrix> {
        prop::collection::vec(prop::collection::vec(-3i64..=3, cols), rows).prop_map(move |rs| {
            RationalMatrix::from_rows(
                cols,
                rs.into_iter().map(|r| r.into_iter().map(rat).collect()).collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn rref_preserves_solution_sets(
            m in small_matrix(4, 4),
            xs in prop::collection::vec(prop::collection::vec(-5i64..=5, 4), 20),
        ) {
            // augment with b = M·x0 so the system is consistent
            let x0: Vec<Rational> = xs[0].iter().map(|&v| rat(v)).collect();
            let b = m.mul_vec(&x0);
            let mut aug = RationalMatrix::zeros(4, 5);
            for i in 0..4 {
                for j in 0..4 { aug[(i, j)] = m[(i, j)].clone(); }
                aug[(i, 4)] = b[i].clone();
            }
            let r = aug.rref();
            let sat = |mat: &RationalMatrix, x: &[Rational]| {
                (0..mat.rows()).all(|i| dot(&mat.row(i)[..4], x) == mat[(i, 4)])
            };
            for x in &xs {
                let x: Vec<Rational> = x.iter().map(|&v| rat(v)).collect();
                prop_assert_eq!(sat(&aug, &x), sat(&r, &x));
            }
            // every nullspace vector shifts solutions to solutions
            for v in m.nullspace() {
                let y: Vec<Rational> = x0.iter().zip(&v).map(|(a, b)| a + b).collect();
                prop_assert!(sat(&r, &y));
            }
        }

        #[test]
        fn lambda_results_are_implied_and_shaped(
            m in small_matrix(3, 4),
            i in 0usize..2,
        ) {
            let b = vec![rat(0); 3];
            if let Some((c, d)) = solve_lambda_system(&m, &b, i, &[], 2) {
                // implied: adding the row does not raise the rank
                let mut rows = m.row_vecs();
                let mut extended = rows.clone();
                extended.push(c.clone());
                rows.iter_mut().for_each(|r| r.push(rat(0)));
                extended.iter_mut().zip(b.iter().chain([&d])).for_each(|(r, v)| r.push(v.clone()));
                let base = RationalMatrix::from_rows(5, rows).rank();
                prop_assert_eq!(RationalMatrix::from_rows(5, extended).rank(), base);
                prop_assert_eq!(&c[i], &rat(1));
                prop_assert_eq!(&c[i + 2], &rat(-1));
                prop_assert!(c[1 - i].is_zero() && c[1 - i + 2].is_zero());
            }
        }
    }
}
