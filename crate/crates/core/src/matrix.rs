//! Dense row-major matrices over a [`Scalar`].
//!
//! Kept deliberately small: the engine needs products, Gauss-Jordan inversion,
//! rank and square solves that work identically for floats and exact
//! rationals. Products skip zero entries, which keeps monomial operators cheap
//! in exact mode.

use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Build from row vectors; `None` if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let n = rows.len();
        Some(Self { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        let nz: Vec<usize> = (0..v.len()).filter(|&j| !v[j].is_zero()).collect();
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let mut acc = S::zero();
                for &j in &nz {
                    if !row[j].is_zero() {
                        acc = acc + row[j].clone() * v[j].clone();
                    }
                }
                acc
            })
            .collect()
    }

    /// `vᵀ M`
    pub fn vec_mul(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.rows, "vector-matrix dimension mismatch");
        let mut out = vec![S::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, m) in self.row(i).iter().enumerate() {
                if !m.is_zero() {
                    out[j] = out[j].clone() + vi.clone() * m.clone();
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64_lossy)
    }

    pub fn max_abs(&self) -> S {
        crate::scalar::max_abs(&self.data)
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v.to_f64_lossy().abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Gauss-Jordan inverse with largest-magnitude pivoting.
    ///
    /// A pivot with magnitude at or below `tol` (exact: zero) means singular.
    pub fn inverse(&self, tol: f64) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = if S::is_exact() { 1.0 } else { self.max_abs().to_f64_lossy().max(1.0) };
        for col in 0..n {
            let pivot = pick_pivot(&a, col, col)?;
            if a[(pivot, col)].approx_zero(tol * scale) {
                return None;
            }
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            let p = a[(col, col)].clone();
            a.scale_row(col, &p);
            inv.scale_row(col, &p);
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                a.sub_row_multiple(r, col, &factor);
                inv.sub_row_multiple(r, col, &factor);
            }
        }
        Some(inv)
    }

    /// Solve `self x = b` for square `self`.
    pub fn solve(&self, b: &[S], tol: f64) -> Option<Vec<S>> {
        Some(self.inverse(tol)?.mul_vec(b))
    }

    /// Rank by elimination with complete pivoting.
    pub fn rank(&self, tol: f64) -> usize {
        let mut a = self.clone();
        let scale = if S::is_exact() { 1.0 } else { self.max_abs().to_f64_lossy().max(1.0) };
        let mut rank = 0;
        let mut cols: Vec<usize> = (0..self.cols).collect();
        while rank < a.rows && rank < cols.len() {
            // complete pivot over remaining rows × remaining columns
            let mut best: Option<(usize, usize, S)> = None;
            for i in rank..a.rows {
                for (ci, &j) in cols.iter().enumerate().skip(rank) {
                    let v = a[(i, j)].abs();
                    if best.as_ref().is_none_or(|b| v > b.2) {
                        best = Some((i, ci, v));
                    }
                }
            }
            let Some((pi, pci, pv)) = best else { break };
            if pv.approx_zero(tol * scale) {
                break;
            }
            a.swap_rows(pi, rank);
            cols.swap(pci, rank);
            let pc = cols[rank];
            let p = a[(rank, pc)].clone();
            for r in rank + 1..a.rows {
                if a[(r, pc)].is_zero() {
                    continue;
                }
                let factor = a[(r, pc)].clone() / p.clone();
                for &j in &cols[rank..] {
                    let v = a[(r, j)].clone() - factor.clone() * a[(rank, j)].clone();
                    a[(r, j)] = v;
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, r: usize, divisor: &S) {
        for j in 0..self.cols {
            let v = &self[(r, j)];
            if !v.is_zero() {
                self[(r, j)] = v.clone() / divisor.clone();
            }
        }
    }

    /// row[r] -= factor * row[src]
    fn sub_row_multiple(&mut self, r: usize, src: usize, factor: &S) {
        for j in 0..self.cols {
            let s = &self[(src, j)];
            if !s.is_zero() {
                let v = self[(r, j)].clone() - factor.clone() * s.clone();
                self[(r, j)] = v;
            }
        }
    }
}

fn pick_pivot<S: Scalar>(a: &Matrix<S>, col: usize, from: usize) -> Option<usize> {
    let mut best: Option<(usize, S)> = None;
    for r in from..a.rows {
        let v = a[(r, col)].abs();
        if v.is_zero() {
            continue;
        }
        // Exact arithmetic only needs a nonzero pivot; take the first.
        if S::is_exact() {
            return Some(r);
        }
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((r, v));
        }
    }
    best.map(|b| b.0).or(Some(from)).filter(|&r| r < a.rows)
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> Serialize for Matrix<S> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let rows: Vec<Vec<serde_json::Value>> =
            (0..self.rows).map(|i| self.row(i).iter().map(Scalar::to_json).collect()).collect();
        rows.serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn inverse_of_two_by_two_exact() {
        let m = Matrix::from_rows(vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(2, 1)]]).unwrap();
        let inv = m.inverse(0.0).unwrap();
        assert_eq!(inv, Matrix::from_rows(vec![vec![q(2, 3), q(-1, 3)], vec![q(-1, 3), q(2, 3)]]).unwrap());
        assert_eq!(m.mul(&inv), Matrix::identity(2));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(m.inverse(1e-12).is_none());
        assert_eq!(m.rank(1e-12), 1);
    }

    #[test]
    fn rank_of_path_metric_family() {
        // {1, d(·,x1), d(·,x2)} on the 3-point path
        let m = Matrix::from_rows(vec![
            vec![q(1, 1), q(1, 1), q(1, 1)],
            vec![q(0, 1), q(1, 1), q(2, 1)],
            vec![q(1, 1), q(0, 1), q(1, 1)],
        ])
        .unwrap();
        assert_eq!(m.rank(0.0), 3);
    }

    #[test]
    fn float_inverse_round_trip() {
        let m = Matrix::from_rows(vec![vec![4.0, 1.0, 0.5], vec![0.0, 3.0, 1.0], vec![2.0, 0.0, 5.0]]).unwrap();
        let p = m.mul(&m.inverse(1e-12).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - e).abs() < 1e-14);
            }
        }
    }
}
