//! Dense linear algebra used by the operator core.
//!
//! Everything here is sized for desk-scale problems (a few thousand rows at
//! most): LU with partial pivoting in log-magnitude/phase form, a real
//! symmetric eigensolver (Householder tridiagonalisation followed by the
//! implicit QL iteration), and a Hermitian eigensolver built on the real
//! `2n x 2n` embedding `[[X, -Y], [Y, X]]` of `X + iY`.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{Cplx, Real};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

pub type CMatrix<T> = Matrix<Cplx<T>>;

impl<E: Clone + Zero> Matrix<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![E::zero(); rows * cols] }
    }
}

impl<E: Clone + Zero + One> Matrix<E> {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }
}

impl<E> Matrix<E> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<E>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> CMatrix<T> {
    /// Principal submatrix on the given index list (order preserved).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(k, j)];
                    out[(i, j)] = out[(i, j)] + a * b;
                }
            }
        }
        out
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        if !self.is_square() {
            return T::infinity();
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `sum_ij |A_ij|^2`
    pub fn frobenius_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == T::zero())
    }
}

/// Determinant stored as `phase * exp(log_abs)`; `phase` is zero for a singular matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet<T> {
    pub log_abs: T,
    pub phase: Cplx<T>,
}

impl<T: Real> LogDet<T> {
    pub fn is_zero(&self) -> bool {
        self.phase.is_zero()
    }

    pub fn value(&self) -> Cplx<T> {
        if self.is_zero() {
            Complex::zero()
        } else {
            self.phase * self.log_abs.exp()
        }
    }
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    odd_swaps: bool,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn factor(mut a: CMatrix<T>) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd_swaps = false;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd_swaps = !odd_swaps;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                if factor.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = a[(k, j)];
                    a[(i, j)] = a[(i, j)] - factor * u;
                }
            }
        }
        Self { lu: a, perm, odd_swaps, singular }
    }

    pub fn log_det(&self) -> LogDet<T> {
        if self.singular {
            return LogDet { log_abs: T::neg_infinity(), phase: Complex::zero() };
        }
        let mut log_abs = T::zero();
        let mut phase: Cplx<T> = if self.odd_swaps { -Complex::one() } else { Complex::one() };
        for i in 0..self.lu.rows {
            let d = self.lu[(i, i)];
            let r = d.norm();
            log_abs = log_abs + r.ln();
            phase = phase * (d / r);
        }
        // renormalise accumulated rounding in the unit phase
        let r = phase.norm();
        LogDet { log_abs, phase: phase / r }
    }

    pub fn det(&self) -> Cplx<T> {
        self.log_det().value()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[Cplx<T>]) -> Option<Vec<Cplx<T>>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut x: Vec<Cplx<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Some(x)
    }

    /// `A^{-1}` column by column.
    pub fn inverse(&self) -> Option<CMatrix<T>> {
        let n = self.lu.rows;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![Complex::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex::zero());
            e[j] = Complex::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }
}

/// Determinant in log-magnitude/phase form.
pub fn log_det<T: Real>(a: &CMatrix<T>) -> LogDet<T> {
    if a.rows == 0 {
        return LogDet { log_abs: T::zero(), phase: Complex::one() };
    }
    Lu::factor(a.clone()).log_det()
}

pub fn det<T: Real>(a: &CMatrix<T>) -> Cplx<T> {
    log_det(a).value()
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascending;
/// `vectors` holds the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<CMatrix<T>>,
}

/// Real symmetric eigenproblem on a row-major `n x n` buffer.
///
/// Returns ascending eigenvalues and, if requested, the eigenvectors as the
/// columns of a row-major matrix.
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize, want_vectors: bool) -> (Vec<T>, Option<Vec<T>>) {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return (Vec::new(), want_vectors.then(Vec::new));
    }
    let mut v = a.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e, n, want_vectors);
    tql2(&mut v, &mut d, &mut e, n, want_vectors);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut out = vec![T::zero(); n * n];
        for (new_col, &old_col) in order.iter().enumerate() {
            for r in 0..n {
                out[r * n + new_col] = v[r * n + old_col];
            }
        }
        out
    });
    (values, vectors)
}

// Householder reduction to tridiagonal form (EISPACK tred2 ordering).
fn tred2<T: Real>(v: &mut [T], d: &mut [T], e: &mut [T], n: usize, accumulate: bool) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
                v[at(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g = g + v[at(k, j)] * d[k];
                    e[k] = e[k] + v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] = v[at(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = v[at(j, j)];
        }
        e[0] = T::zero();
        return;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] = v[at(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = T::zero();
    }
    v[at(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

// Implicit QL on the tridiagonal (d, e), accumulating rotations into v.
fn tql2<T: Real>(v: &mut [T], d: &mut [T], e: &mut [T], n: usize, accumulate: bool) {
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > 60 {
                    break;
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if accumulate {
                        for k in 0..n {
                            let hk = v[at(k, i + 1)];
                            v[at(k, i + 1)] = s * v[at(k, i)] + c * hk;
                            v[at(k, i)] = c * v[at(k, i)] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
}

/// Eigen-decomposition of a Hermitian matrix (assumed Hermitian; only the
/// Hermitian part is used).
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>, want_vectors: bool) -> HermitianEigen<T> {
    assert!(a.is_square());
    let n = a.rows;
    let half = T::lit(0.5);
    if a.is_real() {
        let sym: Vec<T> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                half * (a[(i, j)].re + a[(j, i)].re)
            })
            .collect();
        let (values, vecs) = symmetric_eigen(&sym, n, want_vectors);
        let vectors = vecs.map(|v| CMatrix::from_fn(n, n, |i, j| Complex::new(v[i * n + j], T::zero())));
        return HermitianEigen { values, vectors };
    }

    let m = 2 * n;
    let mut s = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let z = (a[(i, j)] + a[(j, i)].conj()) * half;
            s[i * m + j] = z.re;
            s[(i + n) * m + (j + n)] = z.re;
            s[i * m + (j + n)] = -z.im;
            s[(i + n) * m + j] = z.im;
        }
    }
    let (vals2, vecs2) = symmetric_eigen(&s, m, want_vectors);
    let values: Vec<T> = vals2.iter().step_by(2).copied().collect();
    let vectors = vecs2.map(|v| complex_basis_from_embedding(&vals2, &v, n));
    HermitianEigen { values, vectors }
}

// Each eigenvalue of the embedding appears twice; within every cluster of
// (numerically) equal eigenvalues pick a complex orthonormal basis by
// pivoted Gram-Schmidt over the candidate vectors a + ib.
fn complex_basis_from_embedding<T: Real>(vals: &[T], v: &[T], n: usize) -> CMatrix<T> {
    let m = 2 * n;
    let scale = vals.iter().fold(T::one(), |acc, x| acc.max(x.abs()));
    let tol = T::lit(1e-9) * scale;
    let mut out = CMatrix::zeros(n, n);
    let mut col = 0usize;
    let mut start = 0usize;
    while start < m {
        let mut end = start + 1;
        while end < m && (vals[end] - vals[end - 1]).abs() <= tol {
            end += 1;
        }
        let mut candidates: Vec<Vec<Cplx<T>>> = (start..end)
            .map(|c| (0..n).map(|r| Complex::new(v[r * m + c], v[(r + n) * m + c])).collect())
            .collect();
        let take = (end - start) / 2;
        let mut kept: Vec<Vec<Cplx<T>>> = Vec::with_capacity(take);
        for _ in 0..take {
            for cand in candidates.iter_mut() {
                for q in &kept {
                    let proj = q.iter().zip(cand.iter()).fold(Complex::zero(), |acc: Cplx<T>, (qi, ci)| acc + qi.conj() * ci);
                    for (ci, qi) in cand.iter_mut().zip(q.iter()) {
                        *ci = *ci - proj * qi;
                    }
                }
            }
            let (best, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())))
                .fold((0usize, T::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
            let chosen = candidates.swap_remove(best);
            let norm = chosen.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
            kept.push(chosen.into_iter().map(|z| z / norm).collect());
        }
        for q in kept {
            if col < n {
                for r in 0..n {
                    out[(r, col)] = q[r];
                }
                col += 1;
            }
        }
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn lu_det_of_small_matrices() {
        let a = CMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert_abs_diff_eq!(det(&a).re, -2.0, epsilon = 1e-14);
        let b = CMatrix::from_row_major(2, 2, vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        assert_abs_diff_eq!(det(&b).re, -1.0, epsilon = 1e-14);
        let s = CMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(log_det(&s).is_zero() || det(&s).norm() < 1e-15);
    }

    #[test]
    fn log_det_survives_underflow() {
        let n = 400;
        let a = CMatrix::from_fn(n, n, |i, j| if i == j { c(1e-3, 0.0) } else { c(0.0, 0.0) });
        let ld = log_det(&a);
        assert_abs_diff_eq!(ld.log_abs, n as f64 * (1e-3f64).ln(), epsilon = 1e-9);
        assert_eq!(ld.value().re, 0.0);
    }

    #[test]
    fn lu_solve_roundtrip() {
        let a = CMatrix::from_row_major(
            3,
            3,
            vec![c(2.0, 1.0), c(0.5, 0.0), c(0.0, -1.0), c(1.0, 0.0), c(3.0, 0.0), c(0.2, 0.3), c(0.0, 0.0), c(1.0, 1.0), c(4.0, 0.0)],
        );
        let x = vec![c(1.0, 0.0), c(-2.0, 0.5), c(0.25, 1.0)];
        let b: Vec<_> = (0..3).map(|i| (0..3).fold(c(0.0, 0.0), |acc, j| acc + a[(i, j)] * x[j])).collect();
        let got = Lu::factor(a).solve(&b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert_abs_diff_eq!((g - w).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn symmetric_eigen_reconstructs() {
        let n = 6;
        let a: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                1.0 / (1.0 + (i + j) as f64) + if i == j { i as f64 } else { 0.0 }
            })
            .collect();
        let (vals, vecs) = symmetric_eigen(&a, n, true);
        let v = vecs.unwrap();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n).map(|k| v[i * n + k] * vals[k] * v[j * n + k]).sum();
                assert_abs_diff_eq!(rec, a[i * n + j], epsilon = 1e-12);
            }
        }
        let (vals_only, none) = symmetric_eigen(&a, n, false);
        assert!(none.is_none());
        for (x, y) in vals.iter().zip(&vals_only) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn hermitian_eigen_complex_with_degeneracy() {
        // U diag(0.2, 0.2, 0.7) U^* with a non-real unitary U
        let t = 0.3f64;
        let u = CMatrix::from_row_major(
            3,
            3,
            vec![
                c(t.cos(), 0.0),
                c(0.0, t.sin()),
                c(0.0, 0.0),
                c(0.0, t.sin()),
                c(t.cos(), 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 1.0),
            ],
        );
        let d = CMatrix::from_fn(3, 3, |i, j| if i == j { c([0.2, 0.2, 0.7][i], 0.0) } else { c(0.0, 0.0) });
        let mut a = u.mul(&d).mul(&u.conj_transpose());
        a[(0, 2)] = c(0.1, 0.05);
        a[(2, 0)] = c(0.1, -0.05);
        let eig = hermitian_eigen(&a, true);
        let v = eig.vectors.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let rec = (0..3).fold(c(0.0, 0.0), |acc, k| acc + v[(i, k)] * eig.values[k] * v[(j, k)].conj());
                assert_abs_diff_eq!((rec - a[(i, j)]).norm(), 0.0, epsilon = 1e-12);
            }
        }
        let diag = CMatrix::from_fn(3, 3, |i, j| if i == j { c(0.4, 0.0) } else { c(0.0, 0.0) });
        let mut deg = diag.clone();
        deg[(0, 1)] = c(0.0, 0.0);
        let e2 = hermitian_eigen(&deg, true);
        assert!(e2.values.iter().all(|x| (x - 0.4).abs() < 1e-14));
    }
}
