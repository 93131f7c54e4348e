//! Dense matrices over Q with fraction-free elimination.
//!
//! Row reduction clears denominators row by row and then eliminates with
//! integer cross-multiplication, dividing each row by the gcd of its entries
//! to keep coefficients small. Rational pivots are only introduced when the
//! reduced echelon form is read out.

use crate::rational::{one, zero, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type QVec = Vec<Q>;

#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(crate::rational::fmt_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = one();
        }
        m
    }

    pub fn from_rows(rows: &[QVec]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_rows_with_cols(rows, c).unwrap_or_else(|| {
            panic!("ragged rows: expected {c} columns in every one of {r} rows")
        })
    }

    /// Like `from_rows` but with an explicit column count (needed for 0 rows).
    pub fn from_rows_with_cols(rows: &[QVec], cols: usize) -> Option<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return None;
            }
            data.extend(row.iter().cloned());
        }
        Some(QMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors, each of length `dim`.
    pub fn from_cols(cols: &[QVec], dim: usize) -> Self {
        let mut m = Self::zeros(dim, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), dim);
            for i in 0..dim {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v: Vec<QVec> = rows
            .iter()
            .map(|r| r.iter().map(|&x| crate::rational::q(x)).collect())
            .collect();
        Self::from_rows(&v)
    }

    pub fn diagonal(d: &[Q]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Q] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<QVec> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col(&self, c: usize) -> QVec {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn cols_vec(&self) -> Vec<QVec> {
        (0..self.cols).map(|c| self.col(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
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

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
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
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> QVec {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = zero();
                for (a, x) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn pow(&self, k: usize) -> QMatrix {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `self - lambda * I`
    pub fn shift(&self, lambda: &Q) -> QMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= lambda;
        }
        m
    }

    pub fn commutator(&self, other: &QMatrix) -> QMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        QMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn hstack(&self, other: &QMatrix) -> QMatrix {
        self.transpose().vstack(&other.transpose()).transpose()
    }

    /// Restrict to the given columns.
    pub fn select_cols(&self, cols: &[usize]) -> QMatrix {
        let mut m = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m[(i, jj)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let (int_rows, pivots) = fraction_free_reduce(self);
        let mut out = QMatrix::zeros(self.rows, self.cols);
        for (r, (row, &pc)) in int_rows.iter().zip(&pivots).enumerate() {
            let p = &row[pc];
            for c in 0..self.cols {
                if !row[c].is_zero() {
                    out[(r, c)] = Q::new(row[c].clone(), p.clone());
                }
            }
        }
        (out, pivots)
    }

    pub fn rank(&self) -> usize {
        fraction_free_reduce(self).1.len()
    }

    /// Basis of the null space `{x : self x = 0}`, one vector per free column,
    /// normalized with a 1 in that column.
    pub fn kernel(&self) -> Vec<QVec> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![zero(); self.cols];
                v[f] = one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Nonzero rows of the RREF: a canonical basis of the row space.
    pub fn row_space(&self) -> Vec<QVec> {
        let (r, pivots) = self.rref();
        (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
    }

    /// Some solution of `self x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<QVec> {
        assert_eq!(b.len(), self.rows);
        let aug = self.hstack(&QMatrix::from_cols(&[b.to_vec()], self.rows));
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&QMatrix::identity(n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let idx: Vec<usize> = (n..2 * n).collect();
        Some(r.select_cols(&idx))
    }

    pub fn determinant(&self) -> Q {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !m[(r, c)].is_zero()) else {
                return zero();
            };
            if p != c {
                for j in 0..n {
                    let tmp = m[(p, j)].clone();
                    m[(p, j)] = m[(c, j)].clone();
                    m[(c, j)] = tmp;
                }
                det = -det;
            }
            let pv = m[(c, c)].clone();
            det *= &pv;
            for r in c + 1..n {
                if m[(r, c)].is_zero() {
                    continue;
                }
                let f = &m[(r, c)] / &pv;
                for j in c..n {
                    let delta = &f * &m[(c, j)];
                    m[(r, j)] -= delta;
                }
            }
        }
        det
    }

    pub fn is_nilpotent(&self) -> bool {
        self.is_square() && self.pow(self.rows).is_zero()
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (r, c): (usize, usize)) -> &Q {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Q {
        &mut self.data[r * self.cols + c]
    }
}

fn row_to_integers(row: &[Q]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter()
        .map(|x| x.numer() * (&l / x.denom()))
        .collect()
}

fn primitive(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

/// Gauss-Jordan elimination over Z. Returns the nonzero reduced rows (each
/// primitive, pivot positive) and the pivot columns.
fn fraction_free_reduce(m: &QMatrix) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut rows: Vec<Vec<BigInt>> = (0..m.rows).map(|r| row_to_integers(m.row(r))).collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for c in 0..m.cols {
        if top == rows.len() {
            break;
        }
        let Some(p) = (top..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(top, p);
        if rows[top][c].is_negative() {
            for x in rows[top].iter_mut() {
                *x = -&*x;
            }
        }
        let prow = rows[top].clone();
        let pv = prow[c].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == top || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for j in 0..m.cols {
                row[j] = &pv * &row[j] - &f * &prow[j];
            }
            primitive(row);
        }
        primitive(&mut rows[top]);
        pivots.push(c);
        top += 1;
    }
    rows.truncate(pivots.len());
    (rows, pivots)
}

pub fn vec_zero(n: usize) -> QVec {
    vec![zero(); n]
}

pub fn vec_add(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Q], s: &Q) -> QVec {
    a.iter().map(|x| x * s).collect()
}

pub fn vec_neg(a: &[Q]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn vec_is_zero(a: &[Q]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(zero(), |acc, (x, y)| acc + x * y)
}

pub fn unit(n: usize, i: usize) -> QVec {
    let mut v = vec_zero(n);
    v[i] = one();
    v
}

/// Rank of a list of vectors of common length `dim`.
pub fn rank_of(vectors: &[QVec], dim: usize) -> usize {
    QMatrix::from_rows_with_cols(vectors, dim)
        .expect("vector length mismatch")
        .rank()
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span(basis: &[QVec], v: &[Q]) -> bool {
    if vec_is_zero(v) {
        return true;
    }
    let dim = v.len();
    let r0 = rank_of(basis, dim);
    let mut ext = basis.to_vec();
    ext.push(v.to_vec());
    rank_of(&ext, dim) == r0
}

/// Coordinates of `v` in `basis` (which must be independent).
pub fn coordinates(basis: &[QVec], v: &[Q]) -> Option<QVec> {
    let dim = v.len();
    QMatrix::from_cols(basis, dim).solve(v)
}

/// Basis of the intersection of two subspaces given by spanning sets.
pub fn intersect(a: &[QVec], b: &[QVec], dim: usize) -> Vec<QVec> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let ma = QMatrix::from_cols(a, dim);
    let mb = QMatrix::from_cols(b, dim);
    let k = ma.hstack(&mb.scale(&-one())).kernel();
    let raw: Vec<QVec> = k.iter().map(|x| ma.mul_vec(&x[..a.len()])).collect();
    QMatrix::from_rows_with_cols(&raw, dim).unwrap().row_space()
}

/// Canonical representatives of `big / small` (both spanning sets of vectors
/// of length `dim`, with `small` contained in `big`). The returned vectors are
/// the RREF rows of `big` after eliminating the pivot columns of `small`, so
/// they vanish on those columns.
pub fn quotient_representatives(big: &[QVec], small: &[QVec], dim: usize) -> Vec<QVec> {
    let small_rref = QMatrix::from_rows_with_cols(small, dim).unwrap().rref();
    let reduced: Vec<QVec> = big.iter().map(|v| reduce_mod(v, &small_rref)).collect();
    QMatrix::from_rows_with_cols(&reduced, dim).unwrap().row_space()
}

/// Eliminate the pivot columns of an RREF subspace from `v`.
pub fn reduce_mod(v: &[Q], rref: &(QMatrix, Vec<usize>)) -> QVec {
    let (r, pivots) = rref;
    let mut out = v.to_vec();
    for (i, &p) in pivots.iter().enumerate() {
        if out[p].is_zero() {
            continue;
        }
        let f = out[p].clone();
        for (o, x) in out.iter_mut().zip(r.row(i)) {
            if !x.is_zero() {
                *o -= &f * x;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    #[test]
    fn rref_and_rank() {
        let m = QMatrix::from_i64(&[&[2, 4, 6], &[1, 2, 3], &[0, 1, 1]]);
        let (r, p) = m.rref();
        assert_eq!(p, vec![0, 1]);
        assert_eq!(r.row(0), &[q(1), q(0), q(1)]);
        assert_eq!(r.row(1), &[q(0), q(1), q(1)]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn kernel_annihilates() {
        let m = QMatrix::from_i64(&[&[1, 2, 3, 4], &[2, 4, 7, 9]]);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(vec_is_zero(&m.mul_vec(v)));
        }
    }

    #[test]
    fn inverse_and_det() {
        let m = QMatrix::from_rows(&[vec![q(2), q(1)], vec![q(1), qr(1, 2)]]);
        assert!(m.inverse().is_none());
        assert_eq!(m.determinant(), q(0));
        let m = QMatrix::from_i64(&[&[2, 1], &[7, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMatrix::identity(2));
        assert_eq!(m.determinant(), q(1));
    }

    #[test]
    fn solve_inconsistent() {
        let m = QMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        assert!(m.solve(&[q(1), q(2)]).is_none());
        assert_eq!(m.solve(&[q(3), q(3)]).unwrap(), vec![q(3), q(0)]);
    }

    #[test]
    fn intersection_of_planes() {
        let a = vec![unit(3, 0), unit(3, 1)];
        let b = vec![unit(3, 1), unit(3, 2)];
        let i = intersect(&a, &b, 3);
        assert_eq!(i, vec![unit(3, 1)]);
    }

    #[test]
    fn quotient_reps_vanish_on_small_pivots() {
        let big = vec![unit(3, 0), unit(3, 1), unit(3, 2)];
        let small = vec![vec![q(0), q(1), q(1)]];
        let reps = quotient_representatives(&big, &small, 3);
        assert_eq!(reps, vec![unit(3, 0), unit(3, 2)]);
    }
}
