//! A small row-major dense matrix and the thin SVD used by LSI.
//!
//! Class sizes in this domain are tens to low hundreds of methods, so plain
//! triple loops are fast enough and keep results bit-for-bit reproducible.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on 0
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(self.rows)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self · other`
    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other`
    pub fn t_matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.rows, other.rows, "t_matmul shape mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b_row = other.row(k);
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i];
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · otherᵀ`
    pub fn matmul_t(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.cols, "matmul_t shape mismatch");
        Self::from_fn(self.rows, other.rows, |i, j| dot(self.row(i), other.row(j)))
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Returns a copy with rows rescaled to unit L2 norm; zero rows stay zero.
    pub fn l2_normalize_rows(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.rows {
            let row = out.row_mut(i);
            let norm = math::sqrt(row.iter().map(|x| x * x).sum());
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        out
    }

    /// `P · self · Pᵀ` for the permutation mapping old index `perm[new]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        Self::from_fn(perm.len(), perm.len(), |i, j| self[(perm[i], perm[j])])
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        Self::from_fn(perm.len(), self.cols, |i, j| self[(perm[i], j)])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Thin singular value decomposition `A = U · diag(s) · Vᵀ`.
///
/// `u` is `rows × rows`, `vt` is `rows × cols`; singular values are sorted
/// in descending order. Rows of `vt` belonging to zero singular values are
/// zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub vt: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 80;

impl Svd {
    /// One-sided (Hestenes) Jacobi on the columns of `Aᵀ`.
    ///
    /// The rotations act on the `rows` dimension of `A`, which for LSI is the
    /// method count and is the small side of a methods × vocabulary matrix.
    pub fn compute(a: &Matrix) -> Self {
        let n = a.rows();
        let m = a.cols();
        // Column j of `b` is row j of `a`; stored row-major as n × m so each
        // working column is contiguous.
        let mut b = a.clone();
        let mut j_acc = Matrix::identity(n);

        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (alpha, beta, gamma) = {
                        let bp = b.row(p);
                        let bq = b.row(q);
                        (dot(bp, bp), dot(bq, bq), dot(bp, bq))
                    };
                    if gamma == 0.0 || gamma.abs() <= f64::EPSILON * math::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                    let c = 1.0 / math::sqrt(1.0 + t * t);
                    let s = c * t;
                    rotate_rows(&mut b, p, q, c, s);
                    rotate_rows(&mut j_acc, p, q, c, s);
                }
            }
            if !rotated {
                break;
            }
        }

        let norms: Vec<f64> = (0..n).map(|j| norm(b.row(j))).collect();
        let mut order: Vec<usize> = (0..n).collect();
        // stable sort keeps ties in index order
        order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

        // j_acc holds Jᵀ: row k is column k of J.
        let u = Matrix::from_fn(n, n, |i, k| j_acc[(order[k], i)]);
        let singular_values: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
        let vt = Matrix::from_fn(n, m, |k, t| {
            let s = singular_values[k];
            if s > 0.0 {
                b[(order[k], t)] / s
            } else {
                0.0
            }
        });
        Self {
            u,
            singular_values,
            vt,
        }
    }

    /// Rank-`r` reconstruction `U_r Σ_r V_rᵀ`.
    pub fn reconstruct(&self, r: usize) -> Matrix {
        let n = self.u.rows();
        let m = self.vt.cols();
        let r = r.min(self.singular_values.len());
        Matrix::from_fn(n, m, |i, t| {
            (0..r)
                .map(|k| self.u[(i, k)] * self.singular_values[k] * self.vt[(k, t)])
                .sum()
        })
    }
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(q * cols);
    let rp = &mut head[p * cols..(p + 1) * cols];
    let rq = &mut tail[..cols];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matmul_variants_agree() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let b = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [2.0, -1.0]]).unwrap();
        let ab = a.matmul(&b);
        assert_eq!(ab, Matrix::from_rows(&[[7.0, -1.0], [16.0, -1.0]]).unwrap());
        assert_eq!(a.transpose().t_matmul(&b), ab);
        assert_eq!(a.matmul_t(&b.transpose()), ab);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn svd_of_rank_one() {
        // outer product of (1,2,2) and (3,4): singular value 3 * 5 = 15
        let a = Matrix::from_fn(3, 2, |i, j| [1.0, 2.0, 2.0][i] * [3.0, 4.0][j]);
        let svd = Svd::compute(&a);
        assert!((svd.singular_values[0] - 15.0).abs() < 1e-12);
        assert!(svd.singular_values[1..].iter().all(|s| s.abs() < 1e-12));
        let rec = svd.reconstruct(1);
        for (x, y) in rec.as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    fn arb_matrix() -> impl Strategy<Value = Matrix> {
        (1usize..7, 1usize..9).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3.0f64..3.0, r * c)
                .prop_map(move |d| Matrix::from_vec(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn svd_reconstructs_and_orders(a in arb_matrix()) {
            let svd = Svd::compute(&a);
            let s = &svd.singular_values;
            prop_assert!(s.iter().all(|&x| x >= 0.0));
            prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
            let full = svd.reconstruct(s.len());
            for (x, y) in full.as_slice().iter().zip(a.as_slice()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            // U is orthogonal
            let utu = svd.u.t_matmul(&svd.u);
            for i in 0..utu.rows() {
                for j in 0..utu.cols() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((utu[(i, j)] - e).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn truncation_error_non_increasing(a in arb_matrix()) {
            let svd = Svd::compute(&a);
            let mut prev = f64::INFINITY;
            for r in 0..=svd.singular_values.len() {
                let mut diff = svd.reconstruct(r);
                for (d, x) in diff.as_mut_slice().iter_mut().zip(a.as_slice()) {
                    *d -= x;
                }
                let err = diff.frobenius_norm();
                prop_assert!(err <= prev + 1e-9);
                prev = err;
            }
        }
    }
}
