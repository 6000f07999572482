//! Dense matrices over a finite field.
//!
//! Row reduction always takes the first nonzero entry at or below the
//! current row as pivot, so reduced row echelon forms are reproducible and
//! can be compared with `==`.

use serde::{Deserialize, Serialize};

use crate::gfarith::{FieldCtx, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    /// Row-major construction. Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<FieldElement>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has the wrong length");
        Matrix { rows, cols, data }
    }

    pub fn from_rows<R: AsRef<[FieldElement]>>(cols: usize, rows: &[R]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "row has the wrong length");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[FieldElement]>>(rows: usize, cols: &[C]) -> Self {
        Matrix::from_rows(rows, cols).transpose()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[FieldElement]> {
        // chunks_exact panics on zero width
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, f: &FieldCtx, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = FieldElement::ZERO;
                for l in 0..self.cols {
                    acc = f.add(acc, f.mul(self.get(i, l), other.get(l, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, f: &FieldCtx, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(FieldElement::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }

    /// In-place reduction to reduced row echelon form. Returns pivot columns.
    pub fn rref_in_place(&mut self, f: &FieldCtx) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(sel) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if sel != row {
                for c in 0..self.cols {
                    self.data.swap(sel * self.cols + c, row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(row, col)).expect("pivot is nonzero");
            for c in col..self.cols {
                let v = f.mul(self.get(row, c), inv);
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for c in col..self.cols {
                    let v = f.sub(self.get(r, c), f.mul(factor, self.get(row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rref(&self, f: &FieldCtx) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place(f);
        (m, pivots)
    }

    /// Nonzero rows of the reduced row echelon form.
    pub fn row_space_basis(&self, f: &FieldCtx) -> Matrix {
        let (m, pivots) = self.rref(f);
        let data = m.data[..pivots.len() * m.cols].to_vec();
        Matrix::from_vec(pivots.len(), m.cols, data)
    }

    pub fn rank(&self, f: &FieldCtx) -> usize {
        self.rref(f).1.len()
    }

    /// Basis of `{ x : self * x = 0 }` as the rows of a matrix in reduced row
    /// echelon form.
    pub fn null_space(&self, f: &FieldCtx) -> Matrix {
        let (m, pivots) = self.rref(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            basis.set(i, fc, FieldElement::ONE);
            for (r, &pc) in pivots.iter().enumerate() {
                basis.set(i, pc, f.neg(m.get(r, fc)));
            }
        }
        basis.row_space_basis(f)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    self.get(r, c) == if r == c { FieldElement::ONE } else { FieldElement::ZERO }
                })
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(f: &FieldCtx, rows: usize, cols: usize, vals: &[i64]) -> Matrix {
        Matrix::from_vec(rows, cols, vals.iter().map(|&v| f.from_int(v)).collect())
    }

    #[test]
    fn rank_and_rref() {
        let f = FieldCtx::new(3, 1, None).unwrap();
        let a = m(&f, 3, 2, &[0, 0, 1, 0, 2, 0]);
        assert_eq!(a.rank(&f), 1);
        let (r, piv) = a.rref(&f);
        assert_eq!(piv, vec![0]);
        assert_eq!(r.row(0), &[FieldElement::ONE, FieldElement::ZERO]);
        assert_eq!(m(&f, 2, 2, &[1, 0, 0, 1]).rank(&f), 2);
    }

    #[test]
    fn null_space_is_annihilated() {
        let f = FieldCtx::new(5, 1, None).unwrap();
        let a = m(&f, 2, 4, &[1, 2, 3, 4, 2, 4, 1, 0]);
        let ns = a.null_space(&f);
        assert_eq!(ns.rows() + a.rank(&f), 4);
        for row in ns.row_iter() {
            assert!(a.mul_vec(&f, row).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn null_space_of_full_rank_square_is_empty() {
        let f = FieldCtx::new(7, 1, None).unwrap();
        assert_eq!(Matrix::identity(3).null_space(&f).rows(), 0);
    }

    #[test]
    fn transpose_and_multiply() {
        let f = FieldCtx::new(3, 1, None).unwrap();
        let a = m(&f, 2, 2, &[0, 1, 1, 0]);
        assert!(a.transpose().mul(&f, &a).is_identity());
        assert_eq!(a.mul_vec(&f, &[f.from_int(1), f.from_int(2)]), vec![f.from_int(2), f.from_int(1)]);
    }
}
