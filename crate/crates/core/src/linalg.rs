//! Small exact linear algebra over the rationals: just enough Gauss-Jordan
//! for rank, inverse, and incremental span tracking. Matrices are dense
//! row-major Vec<Vec<Rational>>; everything here is desk scale.

use num_traits::{One, Zero};

use crate::rational::Rational;

pub(crate) type Row = Vec<Rational>;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Matrix {
    pub rows: Vec<Row>,
}

impl Matrix {
    pub fn new(rows: Vec<Row>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0].len() == w[1].len()));
        Matrix { rows }
    }

    pub fn identity(n: usize) -> Self {
        Matrix {
            rows: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn column(&self, j: usize) -> Row {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }


    /// Pivot rows of the column echelon form, one per independent column, in
    /// the order the columns get their pivots. Length equals the rank.
    pub fn column_pivot_rows(&self) -> Vec<usize> {
        let mut cols: Vec<Row> = (0..self.n_cols()).map(|j| self.column(j)).collect();
        let mut pivots = Vec::new();
        for c in 0..cols.len() {
            let pivot = (0..self.n_rows())
                .find(|&r| !pivots.contains(&r) && !cols[c][r].is_zero());
            let Some(p) = pivot else { continue };
            pivots.push(p);
            let scale = cols[c][p].clone();
            for x in cols[c].iter_mut() {
                *x /= &scale;
            }
            let this = cols[c].clone();
            for other in cols.iter_mut().skip(c + 1) {
                if !other[p].is_zero() {
                    let f = other[p].clone();
                    for (o, t) in other.iter_mut().zip(&this) {
                        *o -= &f * t;
                    }
                }
            }
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.column_pivot_rows().len()
    }

    /// Gauss-Jordan inverse; None when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.n_rows();
        if n != self.n_cols() {
            return None;
        }
        let mut a = self.rows.clone();
        let mut b = Matrix::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            b.swap(col, pivot);
            let scale = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x /= &scale;
            }
            for x in b[col].iter_mut() {
                *x /= &scale;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in 0..n {
                        let (ac, bc) = (a[col][c].clone(), b[col][c].clone());
                        a[r][c] -= &f * &ac;
                        b[r][c] -= &f * &bc;
                    }
                }
            }
        }
        Some(Matrix::new(b))
    }
}

/// Incrementally maintained echelon basis of a subspace of Q^n. `insert`
/// reports whether the vector enlarged the span.
#[derive(Default)]
pub(crate) struct SpanBuilder {
    echelon: Vec<(usize, Row)>,
}

impl SpanBuilder {
    pub fn new() -> Self {
        SpanBuilder::default()
    }

    pub fn dim(&self) -> usize {
        self.echelon.len()
    }

    pub fn insert(&mut self, mut v: Row) -> bool {
        for (pivot, basis) in &self.echelon {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone();
                for (x, b) in v.iter_mut().zip(basis) {
                    *x -= &f * b;
                }
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(pivot) => {
                let scale = v[pivot].clone();
                for x in v.iter_mut() {
                    *x /= &scale;
                }
                self.echelon.push((pivot, v));
                self.echelon.sort_by_key(|(p, _)| *p);
                true
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::new(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
    }

    #[test]
    fn rank_and_pivots() {
        assert_eq!(m(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(m(&[&[1, 0], &[0, 1]]).rank(), 2);
        assert_eq!(m(&[&[1], &[1]]).column_pivot_rows(), vec![0]);
        assert_eq!(m(&[&[0], &[3]]).column_pivot_rows(), vec![1]);
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[1, 1], &[1, 0]]);
        let inv = a.inverse().unwrap();
        let id = Matrix::identity(2);
        let prod = Matrix::new(
            (0..2)
                .map(|i| (0..2).map(|j| {
                    (0..2).map(|k| &a.rows[i][k] * &inv.rows[k][j]).sum()
                }).collect())
                .collect(),
        );
        assert_eq!(prod, id);
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn span_growth() {
        let mut s = SpanBuilder::new();
        assert!(s.insert(vec![rat(1), rat(0), rat(1)]));
        assert!(s.insert(vec![rat(0), rat(2), rat(0)]));
        assert!(!s.insert(vec![rat(3), rat(2), rat(3)]));
        assert!(s.insert(vec![rat(0), rat(0), rat(5)]));
        assert_eq!(s.dim(), 3);
    }
}
