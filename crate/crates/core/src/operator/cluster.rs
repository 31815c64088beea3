use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, KernelSpec};
use crate::linalg::CMatrix;
use crate::point::Point;
use crate::scalar::{Cplx, Real};

use super::DiscretizedOperator;

/// Largest tuple length handled by the cluster algebra.
pub const MAX_CLUSTER_ORDER: usize = 8;

/// `r_l = (-1)^{l-1} sum over cyclic orders of K(x_1, x_s(1)) ... K(x_s(l-1), x_1)`
/// from a Gram matrix `G_ij = K(x_i, x_j)`.
pub fn cluster_function_matrix<T: Real>(g: &CMatrix<T>) -> Result<T> {
    let l = g.rows();
    if l == 0 || l > MAX_CLUSTER_ORDER {
        return Err(Error::TooLarge { size: l, max: MAX_CLUSTER_ORDER });
    }
    let mut rest: Vec<usize> = (1..l).collect();
    let mut total: Cplx<T> = Complex::zero();
    each_permutation(&mut rest, 0, &mut |perm| {
        let mut prod = Complex::new(T::one(), T::zero());
        let mut from = 0usize;
        for &to in perm.iter() {
            prod = prod * g[(from, to)];
            from = to;
        }
        prod = prod * g[(from, 0)];
        total = total + prod;
    });
    let sign = if l % 2 == 1 { T::one() } else { -T::one() };
    Ok(sign * total.re)
}

fn each_permutation(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        each_permutation(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Cluster function of `spec` at `points` (`1 <= l <= 8`).
pub fn cluster_function<T: Real>(spec: &KernelSpec<T>, points: &[Point<T>]) -> Result<T> {
    if points.is_empty() || points.len() > MAX_CLUSTER_ORDER {
        return Err(Error::TooLarge { size: points.len(), max: MAX_CLUSTER_ORDER });
    }
    spec.validate()?;
    cluster_function_matrix(&gram_matrix(spec, points)?)
}

/// Direction of the partition-lattice transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobiusDirection {
    /// `r(S) = sum_pi (-1)^{m-1} (m-1)! prod_B rho(B)`
    CorrelationToCluster,
    /// `rho(S) = sum_pi prod_B r(B)`
    ClusterToCorrelation,
}

/// Values on every non-empty sub-tuple of an `l`-tuple, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTable<T> {
    pub order: usize,
    pub values: Vec<Option<T>>,
}

impl<T: Real> ClusterTable<T> {
    pub fn empty(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_CLUSTER_ORDER {
            return Err(Error::TooLarge { size: order, max: MAX_CLUSTER_ORDER });
        }
        Ok(Self { order, values: vec![None; 1 << order] })
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let mut t = Self::empty(order)?;
        for mask in 1..(1usize << order) {
            let idx: Vec<usize> = (0..order).filter(|b| mask >> b & 1 == 1).collect();
            t.values[mask] = Some(f(&idx));
        }
        Ok(t)
    }

    /// Correlation functions `det K` of every sub-tuple of `points`.
    pub fn correlations(spec: &KernelSpec<T>, points: &[Point<T>]) -> Result<Self> {
        let g = gram_matrix(spec, points)?;
        Self::correlations_of_gram(&g)
    }

    pub fn correlations_of_gram(g: &CMatrix<T>) -> Result<Self> {
        Self::from_fn(g.rows(), |idx| crate::linalg::det(&g.submatrix(idx)).re)
    }

    pub fn get(&self, mask: usize) -> Result<T> {
        self.values.get(mask).copied().flatten().ok_or(Error::IncompleteTable(mask))
    }

    pub fn full(&self) -> Result<T> {
        self.get((1 << self.order) - 1)
    }
}

fn each_partition(mask: usize, blocks: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if mask == 0 {
        f(blocks);
        return;
    }
    let low = mask & mask.wrapping_neg();
    let rest = mask ^ low;
    // every subset of `rest`, including the empty one
    let mut sub = rest;
    loop {
        blocks.push(low | sub);
        each_partition(rest ^ sub, blocks, f);
        blocks.pop();
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
}

/// Applies the partition sums in the requested direction.
pub fn mobius_invert<T: Real>(table: &ClusterTable<T>, direction: MobiusDirection) -> Result<ClusterTable<T>> {
    let mut out = ClusterTable::empty(table.order)?;
    let factorial = |m: usize| (1..m).fold(1.0f64, |a, v| a * v as f64);
    for mask in 1..(1usize << table.order) {
        let mut acc = T::zero();
        let mut err = None;
        let mut blocks = Vec::new();
        each_partition(mask, &mut blocks, &mut |bl| {
            let mut prod = T::one();
            for &b in bl {
                match table.get(b) {
                    Ok(v) => prod = prod * v,
                    Err(e) => err = Some(e),
                }
            }
            let coeff = match direction {
                MobiusDirection::ClusterToCorrelation => T::one(),
                MobiusDirection::CorrelationToCluster => {
                    let m = bl.len();
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    T::lit(sign * factorial(m))
                }
            };
            acc = acc + coeff * prod;
        });
        if let Some(e) = err {
            return Err(e);
        }
        out.values[mask] = Some(acc);
    }
    Ok(out)
}

fn stirling2(k: usize, n: usize) -> f64 {
    let mut s = vec![vec![0.0f64; k + 1]; k + 1];
    s[0][0] = 1.0;
    for i in 1..=k {
        for j in 1..=i {
            s[i][j] = j as f64 * s[i - 1][j] + s[i - 1][j - 1];
        }
    }
    if n <= k {
        s[k][n]
    } else {
        0.0
    }
}

fn stirling1_signed(n: usize, k: usize) -> f64 {
    let mut s = vec![vec![0.0f64; n + 1]; n + 1];
    s[0][0] = 1.0;
    for i in 1..=n {
        for j in 1..=i {
            s[i][j] = s[i - 1][j - 1] - (i - 1) as f64 * s[i - 1][j];
        }
    }
    if k <= n {
        s[n][k]
    } else {
        0.0
    }
}

/// Count cumulants from cluster integrals:
/// `sum C_k z^k / k! = sum V_n (e^z - 1)^n / n!`, i.e. `C_k = sum_n S(k, n) V_n`.
pub fn cumulants_from_cluster_integrals<T: Real>(v: &[T]) -> Result<Vec<T>> {
    if v.len() > MAX_CLUSTER_ORDER {
        return Err(Error::TooLarge { size: v.len(), max: MAX_CLUSTER_ORDER });
    }
    Ok((1..=v.len())
        .map(|k| (1..=k).fold(T::zero(), |acc, n| acc + T::lit(stirling2(k, n)) * v[n - 1]))
        .collect())
}

/// Inverse of [`cumulants_from_cluster_integrals`] (signed Stirling numbers of the first kind).
pub fn cluster_integrals_from_cumulants<T: Real>(c: &[T]) -> Result<Vec<T>> {
    if c.len() > MAX_CLUSTER_ORDER {
        return Err(Error::TooLarge { size: c.len(), max: MAX_CLUSTER_ORDER });
    }
    Ok((1..=c.len())
        .map(|n| (1..=n).fold(T::zero(), |acc, k| acc + T::lit(stirling1_signed(n, k)) * c[k - 1]))
        .collect())
}

/// `V_n = int_{B^n} r_n = (-1)^{n-1} (n-1)! Tr(K_B^n)` for `n = 1..=m`.
pub fn cluster_integrals<T: Real>(op: &DiscretizedOperator<T>, m: usize) -> Result<Vec<T>> {
    if m > MAX_CLUSTER_ORDER {
        return Err(Error::TooLarge { size: m, max: MAX_CLUSTER_ORDER });
    }
    let eig = op.eigenvalues();
    Ok((1..=m)
        .map(|n| {
            let tr = eig.iter().fold(T::zero(), |acc, &l| acc + l.powi(n as i32));
            let f = (1..n).fold(1.0f64, |a, v| a * v as f64);
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            T::lit(sign * f) * tr
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use approx::assert_abs_diff_eq;

    #[test]
    fn low_orders() {
        let g = CMatrix::from_row_major(1, 1, vec![cplx(0.7)]);
        assert_abs_diff_eq!(cluster_function_matrix(&g).unwrap(), 0.7);
        let g = CMatrix::from_row_major(2, 2, vec![cplx(0.5), Complex::new(0.1, 0.2), Complex::new(0.1, -0.2), cplx(0.4)]);
        assert_abs_diff_eq!(cluster_function_matrix(&g).unwrap(), -0.05, epsilon = 1e-15);
        let rho = ClusterTable::correlations_of_gram(&g).unwrap();
        assert_abs_diff_eq!(rho.full().unwrap() - 0.5 * 0.4, -0.05, epsilon = 1e-15);
    }

    #[test]
    fn partition_counts_are_bell_numbers() {
        let bell = [1usize, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in bell.iter().enumerate() {
            let mut count = 0;
            each_partition((1usize << n) - 1, &mut Vec::new(), &mut |_| count += 1);
            assert_eq!(count, b);
        }
    }

    #[test]
    fn stirling_inverse_pair() {
        let v = [0.3, -0.2, 0.15, 0.4, -1.0, 2.0, 0.01, 5.0];
        let c = cumulants_from_cluster_integrals(&v).unwrap();
        assert_abs_diff_eq!(c[1], v[1] + v[0], epsilon = 1e-15);
        assert_abs_diff_eq!(c[2], v[2] + 3.0 * v[1] + v[0], epsilon = 1e-15);
        let back = cluster_integrals_from_cumulants(&c).unwrap();
        for (a, b) in back.iter().zip(&v) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn incomplete_table_is_reported() {
        let mut t = ClusterTable::from_fn(3, |idx| idx.len() as f64).unwrap();
        t.values[5] = None;
        assert_eq!(mobius_invert(&t, MobiusDirection::CorrelationToCluster), Err(Error::IncompleteTable(5)));
    }
}
