//! Dense matrices over finite commutative rings.

pub mod additive;
pub mod zpn;

use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::ring::{FiniteRing, RingElem};

pub trait CommRing {
    type E: Copy + Eq + Ord + Hash + Debug;

    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: Self::E, b: Self::E) -> Self::E;
    fn neg(&self, a: Self::E) -> Self::E;
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E;
    fn inv(&self, a: Self::E) -> Option<Self::E>;

    fn sub(&self, a: Self::E, b: Self::E) -> Self::E {
        self.add(a, self.neg(b))
    }
}

impl CommRing for FiniteRing {
    type E = RingElem;

    fn zero(&self) -> RingElem {
        FiniteRing::zero(self)
    }

    fn one(&self) -> RingElem {
        FiniteRing::one(self)
    }

    fn add(&self, a: RingElem, b: RingElem) -> RingElem {
        FiniteRing::add(self, a, b)
    }

    fn neg(&self, a: RingElem) -> RingElem {
        FiniteRing::neg(self, a)
    }

    fn mul(&self, a: RingElem, b: RingElem) -> RingElem {
        FiniteRing::mul(self, a, b)
    }

    fn inv(&self, a: RingElem) -> Option<RingElem> {
        FiniteRing::inv(self, a)
    }
}

/// Row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Copy + Eq> Matrix<E> {
    pub fn new(rows: usize, cols: usize, data: Vec<E>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
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

    pub fn get(&self, i: usize, j: usize) -> E {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: E) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<F: Copy + Eq>(&self, f: impl FnMut(E) -> F) -> Matrix<F> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().copied().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows.start + i, cols.start + j))
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack rows");
        Matrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack cols");
        Matrix::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j)
            } else {
                other.get(i - self.rows, j)
            }
        })
    }

    /// Block matrix from four blocks.
    pub fn blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        a.hstack(b).vstack(&c.hstack(d))
    }
}

impl<E: Copy + Eq> Matrix<E> {
    pub fn zeros<R: CommRing<E = E>>(r: &R, rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| r.zero())
    }

    pub fn identity<R: CommRing<E = E>>(r: &R, n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { r.one() } else { r.zero() })
    }

    pub fn diagonal<R: CommRing<E = E>>(r: &R, diag: &[E]) -> Self {
        Matrix::from_fn(diag.len(), diag.len(), |i, j| if i == j { diag[i] } else { r.zero() })
    }

    pub fn block_diag<R: CommRing<E = E>>(r: &R, a: &Self, b: &Self) -> Self {
        Matrix::blocks(a, &Matrix::zeros(r, a.rows, b.cols), &Matrix::zeros(r, b.rows, a.cols), b)
    }

    pub fn mul<R: CommRing<E = E>>(&self, r: &R, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shapes");
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = r.zero();
                for k in 0..self.cols {
                    acc = r.add(acc, r.mul(self.get(i, k), other.get(k, j)));
                }
                out.push(acc);
            }
        }
        Matrix { rows: self.rows, cols: other.cols, data: out }
    }

    pub fn mul_vec<R: CommRing<E = E>>(&self, r: &R, v: &[E]) -> Vec<E> {
        assert_eq!(self.cols, v.len(), "matrix-vector shapes");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(r.zero(), |acc, k| r.add(acc, r.mul(self.get(i, k), v[k]))))
            .collect()
    }

    pub fn add<R: CommRing<E = E>>(&self, r: &R, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix sum shapes");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| r.add(a, b)).collect(),
        }
    }

    pub fn sub<R: CommRing<E = E>>(&self, r: &R, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix difference shapes");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| r.sub(a, b)).collect(),
        }
    }

    pub fn scale<R: CommRing<E = E>>(&self, r: &R, s: E) -> Self {
        self.map(|a| r.mul(s, a))
    }

    pub fn is_zero<R: CommRing<E = E>>(&self, r: &R) -> bool {
        self.data.iter().all(|&a| a == r.zero())
    }

    /// Coefficients c_0 = 1, c_1, ..., c_n of det(tI - A) = sum c_k t^(n-k),
    /// by the division-free Berkowitz recursion.
    pub fn charpoly<R: CommRing<E = E>>(&self, r: &R) -> Vec<E> {
        assert!(self.is_square(), "charpoly of non-square matrix");
        let n = self.rows;
        let mut c = vec![r.one()];
        for k in 0..n {
            let a = self.get(k, k);
            let row: Vec<E> = (0..k).map(|j| self.get(k, j)).collect();
            let mut col: Vec<E> = (0..k).map(|i| self.get(i, k)).collect();
            let mut q = vec![r.one(), r.neg(a)];
            for _ in 0..k {
                let dot = row.iter().zip(&col).fold(r.zero(), |acc, (&x, &y)| r.add(acc, r.mul(x, y)));
                q.push(r.neg(dot));
                col =
                    (0..k).map(|i| (0..k).fold(r.zero(), |acc, j| r.add(acc, r.mul(self.get(i, j), col[j])))).collect();
            }
            let mut next = vec![r.zero(); k + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                for (j, &cj) in c.iter().enumerate() {
                    if i >= j && i - j < q.len() {
                        *slot = r.add(*slot, r.mul(q[i - j], cj));
                    }
                }
            }
            c = next;
        }
        c
    }

    pub fn det<R: CommRing<E = E>>(&self, r: &R) -> E {
        let c = self.charpoly(r);
        let n = self.rows;
        if n.is_multiple_of(2) {
            c[n]
        } else {
            r.neg(c[n])
        }
    }

    pub fn adjugate<R: CommRing<E = E>>(&self, r: &R) -> Self {
        let n = self.rows;
        let c = self.charpoly(r);
        if n == 0 {
            return self.clone();
        }
        // Horner: A^{n-1} + c_1 A^{n-2} + ... + c_{n-1} I
        let mut acc = Matrix::identity(r, n);
        for &ck in c.iter().take(n).skip(1) {
            acc = self.mul(r, &acc).add(r, &Matrix::identity(r, n).scale(r, ck));
        }
        if n.is_multiple_of(2) {
            acc.map(|a| r.neg(a))
        } else {
            acc
        }
    }

    pub fn inverse<R: CommRing<E = E>>(&self, r: &R) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("inverse of non-square matrix".into()));
        }
        let d = r.inv(self.det(r)).ok_or(Error::NotInvertible)?;
        Ok(self.adjugate(r).scale(r, d))
    }

    pub fn is_invertible<R: CommRing<E = E>>(&self, r: &R) -> bool {
        self.is_square() && r.inv(self.det(r)).is_some()
    }
}

/// Reduced row echelon form over a field; returns the pivot columns.
pub fn field_rref<R: CommRing>(k: &R, m: &mut Matrix<R::E>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols() {
        if row == m.rows() {
            break;
        }
        let Some(piv) = (row..m.rows()).find(|&i| m.get(i, col) != k.zero()) else {
            continue;
        };
        for j in 0..m.cols() {
            let (a, b) = (m.get(row, j), m.get(piv, j));
            m.set(row, j, b);
            m.set(piv, j, a);
        }
        let inv = k.inv(m.get(row, col)).expect("field element invertible");
        for j in 0..m.cols() {
            let v = k.mul(inv, m.get(row, j));
            m.set(row, j, v);
        }
        for i in 0..m.rows() {
            if i == row {
                continue;
            }
            let f = m.get(i, col);
            if f == k.zero() {
                continue;
            }
            for j in 0..m.cols() {
                let v = k.sub(m.get(i, j), k.mul(f, m.get(row, j)));
                m.set(i, j, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn field_rank<R: CommRing>(k: &R, m: &Matrix<R::E>) -> usize {
    let mut w = m.clone();
    field_rref(k, &mut w).len()
}

/// Basis of the right kernel {x : m x = 0} over a field, as columns.
pub fn field_kernel<R: CommRing>(k: &R, m: &Matrix<R::E>) -> Vec<Vec<R::E>> {
    let mut w = m.clone();
    let pivots = field_rref(k, &mut w);
    let free: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![k.zero(); m.cols()];
            x[f] = k.one();
            for (r, &pc) in pivots.iter().enumerate() {
                x[pc] = k.neg(w.get(r, f));
            }
            x
        })
        .collect()
}

/// Some x with m x = b over a field.
pub fn field_solve<R: CommRing>(k: &R, m: &Matrix<R::E>, b: &[R::E]) -> Option<Vec<R::E>> {
    let aug = m.hstack(&Matrix::new(b.len(), 1, b.to_vec()));
    let mut w = aug.clone();
    let pivots = field_rref(k, &mut w);
    if pivots.contains(&m.cols()) {
        return None;
    }
    let mut x = vec![k.zero(); m.cols()];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = w.get(r, m.cols());
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::WittRing;

    #[test]
    fn charpoly_det_inverse_small() {
        let k = FiniteRing::parse("GF(5)").unwrap();
        let e = |x: i64| k.from_int(x);
        let m = Matrix::new(3, 3, vec![e(1), e(2), e(0), e(3), e(1), e(4), e(0), e(2), e(2)]);
        // det = 1*(2-8) - 2*(6-0) + 0 = -18 = 2 mod 5
        assert_eq!(m.det(&k), e(2));
        let inv = m.inverse(&k).unwrap();
        assert_eq!(m.mul(&k, &inv), Matrix::identity(&k, 3));
        let c = m.charpoly(&k);
        assert_eq!(c[1], k.neg(e(4)));
    }

    #[test]
    fn witt_matrix_inverse() {
        let w = WittRing::new(&FiniteRing::parse("GF(2)").unwrap(), 2).unwrap();
        let m = Matrix::new(2, 2, vec![w.from_int(1), w.from_int(2), w.from_int(3), w.from_int(3)]);
        // det = 3 - 6 = -3 = 1 mod 4
        assert_eq!(m.det(&w), w.from_int(1));
        let inv = m.inverse(&w).unwrap();
        assert_eq!(inv.mul(&w, &m), Matrix::identity(&w, 2));
        let singular = Matrix::new(1, 1, vec![w.from_int(2)]);
        assert_eq!(singular.inverse(&w), Err(Error::NotInvertible));
    }

    #[test]
    fn field_kernel_and_solve() {
        let k = FiniteRing::parse("GF(3)").unwrap();
        let e = |x: i64| k.from_int(x);
        let m = Matrix::new(2, 3, vec![e(1), e(1), e(0), e(0), e(1), e(1)]);
        let ker = field_kernel(&k, &m);
        assert_eq!(ker.len(), 1);
        assert!(m.mul_vec(&k, &ker[0]).iter().all(|&x| x == k.zero()));
        let x = field_solve(&k, &m, &[e(1), e(2)]).unwrap();
        assert_eq!(m.mul_vec(&k, &x), vec![e(1), e(2)]);
        assert_eq!(field_rank(&k, &m), 2);
    }
}
