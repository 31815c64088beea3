use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::kernels::eval_kernel_unchecked;
use crate::linalg::{det, CMatrix};
use crate::point::Point;
use crate::scalar::{cplx, Cplx, Real};

use super::DiscretizedOperator;

/// Largest eigenvalue tolerated before `(I - K)^{-1}` is considered unsafe.
pub const JANOSSY_SPECTRAL_GAP: f64 = 1e-8;

/// `det(I - K_B)` together with `L_B = K_B (I - K_B)^{-1}` in node space.
#[derive(Debug, Clone)]
pub struct JanossyKernel<T> {
    pub gap: T,
    /// `V diag(lambda / (1 - lambda)) V^*`
    pub l_nodes: CMatrix<T>,
    vectors: CMatrix<T>,
    values: Vec<T>,
}

impl<T: Real> JanossyKernel<T> {
    pub fn new(op: &DiscretizedOperator<T>) -> Result<Self> {
        let eig = op.eigen();
        let values = eig.values.clone();
        let top = values.last().copied().unwrap_or(T::zero());
        if top > T::one() - T::lit(JANOSSY_SPECTRAL_GAP) {
            return Err(Error::SpectrumNearOne(top.as_f64()));
        }
        let v = eig.vectors.clone().expect("eigenvectors requested");
        let n = values.len();
        let ratio: Vec<T> = values.iter().map(|&l| l / (T::one() - l)).collect();
        let mut l_nodes = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc: Cplx<T> = Complex::zero();
                for k in 0..n {
                    acc = acc + v[(i, k)] * v[(j, k)].conj() * ratio[k];
                }
                l_nodes[(i, j)] = acc;
                l_nodes[(j, i)] = acc.conj();
            }
            l_nodes[(i, i)] = cplx(l_nodes[(i, i)].re);
        }
        let gap = values.iter().fold(T::one(), |acc, &l| acc * (T::one() - l));
        Ok(Self { gap, l_nodes, vectors: v, values })
    }

    /// Janossy density at quadrature nodes `idx`, with respect to the
    /// reference measure (weights divided out).
    pub fn at_nodes(&self, op: &DiscretizedOperator<T>, idx: &[usize]) -> T {
        if idx.is_empty() {
            return self.gap;
        }
        let sub = self.l_nodes.submatrix(idx);
        let w = idx.iter().fold(T::one(), |acc, &i| acc * op.scheme.weights[i]);
        self.gap * det(&sub).re / w
    }

    /// `L(x, y) = K(x, y) + sum_k a_k(x) conj(a_k(y)) / (1 - lambda_k)` with
    /// `a_k(x) = sum_i K(x, x_i) sqrt(w_i) v_ik` (Nyström extension).
    pub fn l_matrix(&self, op: &DiscretizedOperator<T>, points: &[Point<T>]) -> Result<CMatrix<T>> {
        let spec = op
            .spec()
            .ok_or_else(|| Error::Unsupported("arbitrary points need the kernel behind the operator".into()))?;
        let n = op.len();
        let sw: Vec<T> = op.scheme.weights.iter().map(|w| w.sqrt()).collect();
        let mut a: Vec<Vec<Cplx<T>>> = Vec::with_capacity(points.len());
        for p in points {
            let row: Vec<Cplx<T>> = (0..n)
                .map(|i| eval_kernel_unchecked(spec, p, &op.scheme.nodes[i]).map(|k| k * sw[i]))
                .collect::<Result<_>>()?;
            let ak: Vec<Cplx<T>> = (0..n)
                .map(|k| (0..n).fold(Complex::zero(), |acc: Cplx<T>, i| acc + row[i] * self.vectors[(i, k)]))
                .collect();
            a.push(ak);
        }
        let m = points.len();
        let mut out = CMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = eval_kernel_unchecked(spec, &points[i], &points[j])?;
                for k in 0..n {
                    acc = acc + a[i][k] * a[j][k].conj() / (T::one() - self.values[k]);
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }
}

/// Janossy density `det(I - K_B) det[L_B(x_i, x_j)]` at quadrature nodes.
pub fn janossy_at_nodes<T: Real>(op: &DiscretizedOperator<T>, idx: &[usize]) -> Result<T> {
    Ok(JanossyKernel::new(op)?.at_nodes(op, idx))
}

/// Janossy density at arbitrary points of the window. Lattice points of a
/// finite discrete operator are looked up among its sites.
pub fn janossy_density<T: Real>(op: &DiscretizedOperator<T>, points: &[Point<T>]) -> Result<T> {
    let jk = JanossyKernel::new(op)?;
    if points.is_empty() {
        return Ok(jk.gap);
    }
    if op.spec().is_none() {
        let idx = points
            .iter()
            .map(|p| {
                op.scheme
                    .nodes
                    .iter()
                    .position(|q| q == p)
                    .ok_or(Error::OutsideSupport { what: "site", value: p.coord().as_f64() })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(jk.at_nodes(op, &idx));
    }
    for p in points {
        if !op.scheme.window.contains(p) {
            return Err(Error::OutsideSupport { what: "Janossy point", value: p.coord().as_f64() });
        }
    }
    let l = jk.l_matrix(op, points)?;
    Ok(jk.gap * det(&l).re)
}
