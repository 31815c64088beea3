use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::point::Point;
use crate::scalar::{cplx, Cplx, Real};
use crate::special::bessel_j_sequence;

use super::{projection_frames, bounded_variance_eigenvalue, KernelSpec};

impl DiscreteKernel<f64> {
    /// `U diag(spectrum) U^*` with `U` from Gram–Schmidt on a complex
    /// Gaussian matrix.
    pub fn random_with_spectrum<R: Rng + ?Sized>(spectrum: &[f64], rng: &mut R) -> Self {
        let n = spectrum.len();
        let mut cols: Vec<Vec<Complex<f64>>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut v: Vec<Complex<f64>> =
                (0..n).map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            for u in &cols {
                let dot: Complex<f64> = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(u) {
                    *x -= dot * a;
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
        let m = CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| cols[k][i] * cols[k][j].conj() * spectrum[k]).sum());
        Self::from_matrix(m).expect("square")
    }

    /// Random kernel with spectrum uniform on `(0.02, 0.98)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let spectrum: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98)).collect();
        Self::random_with_spectrum(&spectrum, rng)
    }

    /// Random rank-`r` orthogonal projector on `n` sites.
    pub fn random_projector<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Self {
        let spectrum: Vec<f64> = (0..n).map(|k| if k < r { 1.0 } else { 0.0 }).collect();
        Self::random_with_spectrum(&spectrum, rng)
    }
}

/// Kernel matrix on a finite, ordered ground set of lattice labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel<T> {
    labels: Vec<T>,
    matrix: CMatrix<T>,
}

impl<T: Real> DiscreteKernel<T> {
    /// Wraps a matrix, making it exactly Hermitian when it already is up to
    /// `1e-12`; otherwise the matrix is kept as given.
    pub fn new(labels: Vec<T>, matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != labels.len() {
            return Err(Error::InvalidKernel(format!(
                "{} labels for a {}x{} matrix",
                labels.len(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        let mut matrix = matrix;
        if matrix.hermitian_defect() <= T::lit(1e-12) {
            let n = matrix.rows();
            for i in 0..n {
                matrix[(i, i)] = cplx(matrix[(i, i)].re);
                for j in i + 1..n {
                    matrix[(j, i)] = matrix[(i, j)].conj();
                }
            }
        }
        Ok(Self { labels, matrix })
    }

    /// Labels `0, 1, ..., n-1`.
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        let labels = (0..matrix.rows()).map(T::from_usize_lossy).collect();
        Self::new(labels, matrix)
    }

    /// Real diagonal kernel `diag(p)`.
    pub fn diagonal(p: &[T]) -> Self {
        let n = p.len();
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { cplx(p[i]) } else { Complex::new(T::zero(), T::zero()) });
        Self::from_matrix(m).expect("diagonal kernel is square")
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: T) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn value(&self, x: T, y: T) -> Result<Cplx<T>> {
        let missing = |v: T| Error::OutsideSupport { what: "ground-set label", value: v.as_f64() };
        let i = self.index_of(x).ok_or_else(|| missing(x))?;
        let j = self.index_of(y).ok_or_else(|| missing(y))?;
        Ok(self.matrix[(i, j)])
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let d = self.matrix.hermitian_defect();
        if d == T::zero() {
            Ok(())
        } else {
            Err(Error::NotHermitian(d.as_f64()))
        }
    }

    /// Restriction to the given positions (order preserved).
    pub fn restrict(&self, idx: &[usize]) -> Self {
        Self { labels: idx.iter().map(|&i| self.labels[i]).collect(), matrix: self.matrix.submatrix(idx) }
    }
}

/// Dense kernel matrix of a lattice family on `ground_set`.
pub fn build_discrete_kernel<T: Real>(spec: &KernelSpec<T>, ground_set: &[T]) -> Result<DiscreteKernel<T>> {
    spec.validate()?;
    let n = ground_set.len();
    let points: Vec<Point<T>> = ground_set.iter().map(|&x| Point::Lattice(x)).collect();
    for p in &points {
        spec.check_point(p)?;
    }
    match spec {
        KernelSpec::DiscreteBessel { theta, allow_mixed_sign } => {
            let has_pos = ground_set.iter().any(|&x| x > T::zero());
            let has_neg = ground_set.iter().any(|&x| x < T::zero());
            if has_pos && has_neg && !allow_mixed_sign {
                return Err(Error::Constraint(
                    "discrete Bessel kernel is not Hermitian across the sign boundary; enable mixed-sign evaluation explicitly".into(),
                ));
            }
            let m = discrete_bessel_matrix(*theta, ground_set);
            if has_pos && has_neg {
                Ok(DiscreteKernel { labels: ground_set.to_vec(), matrix: m })
            } else {
                DiscreteKernel::new(ground_set.to_vec(), m)
            }
        }
        KernelSpec::MeixnerMN { .. } => {
            let phi = projection_frames(spec, &points)?;
            let r = phi.cols();
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let mut acc = T::zero();
                    for k in 0..r {
                        acc = acc + phi[(i, k)].re * phi[(j, k)].re;
                    }
                    m[(i, j)] = cplx(acc);
                    m[(j, i)] = cplx(acc);
                }
            }
            DiscreteKernel::new(ground_set.to_vec(), m)
        }
        KernelSpec::BoundedVariance => {
            let m = CMatrix::from_fn(n, n, |i, j| {
                if ground_set[i] == ground_set[j] {
                    cplx(bounded_variance_eigenvalue(ground_set[i]))
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            });
            DiscreteKernel::new(ground_set.to_vec(), m)
        }
        KernelSpec::ExplicitDiscrete(k) => {
            let idx = ground_set
                .iter()
                .map(|&x| k.index_of(x).ok_or(Error::OutsideSupport { what: "ground-set label", value: x.as_f64() }))
                .collect::<Result<Vec<_>>>()?;
            Ok(k.restrict(&idx))
        }
        other => Err(Error::Unsupported(format!("{} is not a lattice family", other.name()))),
    }
}

fn discrete_bessel_matrix<T: Real>(theta: T, labels: &[T]) -> CMatrix<T> {
    let half = T::lit(0.5);
    let arg = T::lit(2.0) * theta.sqrt();
    let top = labels.iter().fold(T::zero(), |acc, x| acc.max(x.abs())) + half;
    let len = top.to_usize().unwrap_or(0) + (arg.as_f64() + 40.0) as usize;
    let j = bessel_j_sequence(len, arg);
    // tail[k] = sum_{s >= k} J_s^2
    let mut tail = vec![T::zero(); j.len() + 1];
    for k in (0..j.len()).rev() {
        tail[k] = tail[k + 1] + j[k] * j[k];
    }
    let st = theta.sqrt();
    let idx = |v: T| v.to_usize().unwrap_or(0);
    let n = labels.len();
    CMatrix::from_fn(n, n, |a, b| {
        let (x, y) = (labels[a], labels[b]);
        let (ax, ay) = (x.abs(), y.abs());
        let (xm, xp, ym, yp) = (idx(ax - half), idx(ax + half), idx(ay - half), idx(ay + half));
        let v = if x * y > T::zero() {
            if ax == ay {
                tail[xm + 1]
            } else {
                st * (j[xm] * j[yp] - j[xp] * j[ym]) / (ax - ay)
            }
        } else {
            st * (j[xm] * j[ym] - j[xp] * j[yp]) / (x - y)
        };
        cplx(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::eval_kernel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bounded_variance_kernel_is_diagonal() {
        let g: Vec<f64> = (-3..=3).map(|k| k as f64).collect();
        let k = build_discrete_kernel(&KernelSpec::BoundedVariance, &g).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 1.0 - 1.0 / (g[i] * g[i] + 1.0) } else { 0.0 };
                assert_eq!(k.matrix()[(i, j)].re, want);
            }
        }
    }

    #[test]
    fn single_meixner_row_is_rank_one() {
        let g: Vec<f64> = (0..60).map(|k| k as f64).collect();
        let k = build_discrete_kernel(&KernelSpec::MeixnerMN { m: 1, n: 1, q: 0.3 }, &g).unwrap();
        let m = k.matrix();
        for i in 0..60 {
            for j in 0..60 {
                let v = (m[(i, i)].re * m[(j, j)].re).sqrt();
                assert_abs_diff_eq!(m[(i, j)].re, v, epsilon = 1e-15);
            }
        }
        let tr: f64 = (0..60).map(|i| m[(i, i)].re).sum();
        assert_abs_diff_eq!(tr, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn discrete_bessel_mixed_sign_needs_opt_in() {
        let g = [-1.5, 0.5, 1.5];
        let spec = KernelSpec::DiscreteBessel { theta: 1.0, allow_mixed_sign: false };
        assert!(matches!(build_discrete_kernel(&spec, &g), Err(Error::Constraint(_))));
        let spec = KernelSpec::DiscreteBessel { theta: 1.0, allow_mixed_sign: true };
        let k = build_discrete_kernel(&spec, &g).unwrap();
        assert!(k.check_hermitian().is_err());
    }

    #[test]
    fn discrete_bessel_matches_pointwise_and_sum_form() {
        let theta = 1.0f64;
        let g: Vec<f64> = (0..10).map(|k| k as f64 + 0.5).collect();
        let spec = KernelSpec::DiscreteBessel { theta, allow_mixed_sign: false };
        let k = build_discrete_kernel(&spec, &g).unwrap();
        let j = bessel_j_sequence(80, 2.0);
        for (a, &x) in g.iter().enumerate() {
            for (b, &y) in g.iter().enumerate() {
                let pointwise = eval_kernel(&spec, &Point::Lattice(x), &Point::Lattice(y)).unwrap().re;
                assert_abs_diff_eq!(k.matrix()[(a, b)].re, pointwise, epsilon = 1e-12);
                // sum_{s >= 1} J_{x-1/2+s} J_{y-1/2+s}
                let (xm, ym) = ((x - 0.5) as usize, (y - 0.5) as usize);
                let series: f64 = (1..60).map(|s| j[xm + s] * j[ym + s]).sum();
                assert_abs_diff_eq!(k.matrix()[(a, b)].re, series, epsilon = 1e-12);
            }
        }
    }
}
