//! Dense matrices over an exact field and Gauss-Jordan elimination.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::field::{Field, FieldKind};

#[derive(Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: fmt::Display> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &F {
        &self.data[r * self.cols + c]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut F {
        &mut self.data[r * self.cols + c]
    }
}

/// Reduced row echelon form together with its pivot columns.
pub struct Echelon<F> {
    pub matrix: Matrix<F>,
    pub pivots: Vec<usize>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, cols: &[Vec<F>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<F> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        let v = out[(r, c)].clone() + a.clone() * b.clone();
                        out[(r, c)] = v;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = F::zero();
                for (c, x) in v.iter().enumerate() {
                    let a = &self[(r, c)];
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &F) -> Matrix<F> {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn pow(&self, e: usize) -> Matrix<F> {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn hstack(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.rows, other.rows);
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..other.cols {
                m[(r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        m
    }

    pub fn vstack(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix<F> {
        let mut m = Self::zeros(idx.len(), self.cols);
        for (i, &r) in idx.iter().enumerate() {
            for c in 0..self.cols {
                m[(i, c)] = self[(r, c)].clone();
            }
        }
        m
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix<F> {
        let mut m = Self::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                m[(r, j)] = self[(r, c)].clone();
            }
        }
        m
    }

    /// Block-diagonal sum.
    pub fn block_diag(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
        let mut m = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        m.set_block(0, 0, a);
        m.set_block(a.rows, a.cols, b);
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix<F>) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)].clone();
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix<F> {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = self[(r0 + r, c0 + c)].clone();
            }
        }
        m
    }

    pub fn trace(&self) -> F {
        let mut t = F::zero();
        for i in 0..self.rows.min(self.cols) {
            t = t + self[(i, i)].clone();
        }
        t
    }

    /// Gauss-Jordan elimination to reduced row echelon form.
    pub fn rref(&self) -> Echelon<F> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = F::one() / m[(row, col)].clone();
            for c in col..m.cols {
                let v = m[(row, c)].clone() * inv.clone();
                m[(row, c)] = v;
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in col..m.cols {
                    let pv = &m.data[row * m.cols + c];
                    if pv.is_zero() {
                        continue;
                    }
                    let v = m[(r, c)].clone() - factor.clone() * pv.clone();
                    m[(r, c)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        self.rref().pivots.len()
    }

    /// Basis of the right kernel, as the columns of a `cols × k` matrix.
    pub fn nullspace(&self) -> Matrix<F> {
        let n = self.cols;
        if self.rows == 0 {
            return Self::identity(n);
        }
        let e = self.rref();
        let mut is_pivot = vec![false; n];
        for &p in &e.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let mut k = Self::zeros(n, free.len());
        for (j, &fc) in free.iter().enumerate() {
            k[(fc, j)] = F::one();
            for (r, &pc) in e.pivots.iter().enumerate() {
                let v = &e.matrix[(r, fc)];
                if !v.is_zero() {
                    k[(pc, j)] = -v.clone();
                }
            }
        }
        k
    }

    /// A basis of the column space, chosen among the columns themselves.
    pub fn column_basis(&self) -> Matrix<F> {
        if self.cols == 0 || self.rows == 0 {
            return Self::zeros(self.rows, 0);
        }
        let e = self.rref();
        self.select_cols(&e.pivots)
    }

    /// Solve `self · X = b`; `None` if inconsistent. Free variables are zero.
    pub fn solve(&self, b: &Matrix<F>) -> Option<Matrix<F>> {
        assert_eq!(self.rows, b.rows);
        let aug = self.hstack(b);
        let e = aug.rref();
        let n = self.cols;
        if e.pivots.iter().any(|&p| p >= n) {
            return None;
        }
        let mut x = Self::zeros(n, b.cols);
        for (r, &pc) in e.pivots.iter().enumerate() {
            for c in 0..b.cols {
                x[(pc, c)] = e.matrix[(r, n + c)].clone();
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix<F>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Some(Self::zeros(0, 0));
        }
        let e = self.hstack(&Self::identity(n)).rref();
        if e.pivots.len() < n || e.pivots[n - 1] >= n {
            return None;
        }
        Some(e.matrix.block(0, n, n, n))
    }

    /// Extend the independent columns of `self` to a basis of the ambient
    /// space: returns unit columns completing it.
    pub fn complement_units(&self) -> Matrix<F> {
        let d = self.rows;
        if self.cols == 0 {
            return Self::identity(d);
        }
        let e = self.transpose().rref();
        let mut is_pivot = vec![false; d];
        for &p in &e.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..d).filter(|&c| !is_pivot[c]).collect();
        let mut m = Self::zeros(d, free.len());
        for (j, &r) in free.iter().enumerate() {
            m[(r, j)] = F::one();
        }
        m
    }

    /// Ranks of successive powers, `[rank N^0, rank N^1, ...]` until zero.
    pub fn nilpotent_ranks(&self) -> Vec<usize> {
        assert_eq!(self.rows, self.cols);
        let mut out = vec![self.rows];
        let mut p = Self::identity(self.rows);
        for _ in 0..self.rows {
            p = p.mul(self);
            let r = p.rank();
            out.push(r);
            if r == 0 {
                break;
            }
        }
        out
    }
}

/// Attach the field's modulus to a possibly unbound constant.
#[inline]
pub fn bind<F: Field>(x: F, kind: FieldKind) -> F {
    x + F::from_int(0, kind)
}

/// Sum of subspaces given by column bases; returns an independent basis.
pub fn span<F: Field>(rows: usize, parts: &[Matrix<F>]) -> Matrix<F> {
    let mut m = Matrix::zeros(rows, 0);
    for p in parts {
        m = m.hstack(p);
    }
    m.column_basis()
}

/// Sparse linear system in `ncols` unknowns, assembled row by row.
pub struct LinearSystem<F> {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, F)>>,
    kind: FieldKind,
}

impl<F: Field> LinearSystem<F> {
    pub fn new(ncols: usize, kind: FieldKind) -> Self {
        LinearSystem { ncols, rows: Vec::new(), kind }
    }

    pub fn push(&mut self, mut row: Vec<(usize, F)>) {
        row.retain(|(_, x)| !x.is_zero());
        for (_, x) in row.iter_mut() {
            *x = bind(x.clone(), self.kind);
        }
        if !row.is_empty() {
            self.rows.push(row);
        }
    }

    pub fn to_dense(&self) -> Matrix<F> {
        let mut m = Matrix::<F>::zeros(self.rows.len(), self.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, x) in row {
                let v = m[(r, *c)].clone() + x.clone();
                m[(r, *c)] = v;
            }
        }
        m
    }

    /// Basis of the solution space of the homogeneous system.
    pub fn solution_space(&self) -> Matrix<F> {
        let k = if self.rows.is_empty() {
            Matrix::identity(self.ncols)
        } else {
            self.to_dense().nullspace()
        };
        k.map(|x| bind(x.clone(), self.kind))
    }

    pub fn solution_dim(&self) -> usize {
        if self.rows.is_empty() {
            return self.ncols;
        }
        self.ncols - self.to_dense().rank()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp;
    use num_rational::BigRational;

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = Matrix::from_rows(vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]]);
        let k = a.nullspace();
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).is_zero());
    }

    #[test]
    fn inverse_roundtrip_mod_p() {
        let p = 101;
        let f = |x| Fp::new(x, p);
        let a = Matrix::from_rows(vec![vec![f(2), f(1)], vec![f(7), f(4)]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2).map(|x: &Fp| *x + f(0)));
    }

    #[test]
    fn solve_inconsistent() {
        let a = Matrix::from_rows(vec![vec![q(1), q(1)], vec![q(1), q(1)]]);
        let b = Matrix::from_rows(vec![vec![q(1)], vec![q(2)]]);
        assert!(a.solve(&b).is_none());
    }

    #[test]
    fn nilpotent_ranks_of_jordan_block() {
        let mut n = Matrix::<BigRational>::zeros(3, 3);
        n[(1, 0)] = q(1);
        n[(2, 1)] = q(1);
        assert_eq!(n.nilpotent_ranks(), vec![3, 2, 1, 0]);
    }
}
