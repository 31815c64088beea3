//! Quadrature realisation of `chi_B K chi_B` and the determinant formulas
//! built on it.

mod cluster;
mod janossy;
mod oracle;

pub use cluster::{
    cluster_function, cluster_function_matrix, cluster_integrals, cumulants_from_cluster_integrals,
    cluster_integrals_from_cumulants, mobius_invert, ClusterTable, MobiusDirection, MAX_CLUSTER_ORDER,
};
pub use janossy::{janossy_at_nodes, janossy_density, JanossyKernel};
pub use oracle::{brute_force_oracle, OracleDistribution, MAX_ORACLE_SITES};

use std::sync::OnceLock;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::kernels::{eval_kernel_unchecked, projection_frames, DiscreteKernel, KernelSpec};
use crate::linalg::{hermitian_eigen, log_det, CMatrix, HermitianEigen};
use crate::point::Point;
use crate::quadrature::{QuadratureScheme, Window};
use crate::scalar::{cplx, Cplx, Real};

/// Absolute eigenvalue slack of the validity check.
pub const VALIDITY_TOL: f64 = 1e-9;

/// Hermitian matrix `sqrt(w_i) K(x_i, x_j) sqrt(w_j)` on quadrature nodes
/// (or plain `K` on a finite ground set, with unit weights).
#[derive(Debug, Clone)]
pub struct DiscretizedOperator<T: Real> {
    pub scheme: QuadratureScheme<T>,
    pub matrix: CMatrix<T>,
    spec: Option<KernelSpec<T>>,
    eigenvalues: OnceLock<Vec<T>>,
    eigen: OnceLock<HermitianEigen<T>>,
}

/// Discretise `spec` on `window` with `order` Gauss–Legendre nodes per axis.
pub fn discretize<T: Real>(spec: &KernelSpec<T>, window: &Window<T>, order: usize) -> Result<DiscretizedOperator<T>> {
    if order < 2 {
        return Err(Error::Constraint(format!("quadrature order {order} must be at least 2")));
    }
    let scheme = QuadratureScheme::gauss_legendre(window, order)?;
    DiscretizedOperator::from_scheme(spec, scheme)
}

impl<T: Real> DiscretizedOperator<T> {
    /// Nyström matrix of `spec` on a prepared scheme.
    pub fn from_scheme(spec: &KernelSpec<T>, scheme: QuadratureScheme<T>) -> Result<Self> {
        spec.validate()?;
        for p in &scheme.nodes {
            if !scheme.window.contains(p) {
                return Err(Error::OutsideSupport { what: "quadrature node", value: p.coord().as_f64() });
            }
        }
        let n = scheme.len();
        let sw: Vec<T> = scheme.weights.iter().map(|w| w.sqrt()).collect();
        let mut matrix = CMatrix::zeros(n, n);
        let frame_family = matches!(
            spec,
            KernelSpec::HermiteN { .. } | KernelSpec::LaguerreN { .. } | KernelSpec::GinibreTau { n: Some(_), .. } | KernelSpec::MeixnerMN { .. }
        );
        if frame_family {
            let phi = projection_frames(spec, &scheme.nodes)?;
            let r = phi.cols();
            for i in 0..n {
                for j in i..n {
                    let mut acc: Cplx<T> = Complex::zero();
                    for k in 0..r {
                        acc = acc + phi[(i, k)] * phi[(j, k)].conj();
                    }
                    let v = acc * (sw[i] * sw[j]);
                    matrix[(i, j)] = v;
                    matrix[(j, i)] = v.conj();
                }
                matrix[(i, i)] = cplx(matrix[(i, i)].re);
            }
        } else {
            let hermitian = spec.is_hermitian();
            for i in 0..n {
                let start = if hermitian { i } else { 0 };
                for j in start..n {
                    let v = eval_kernel_unchecked(spec, &scheme.nodes[i], &scheme.nodes[j])? * (sw[i] * sw[j]);
                    matrix[(i, j)] = v;
                    if hermitian {
                        matrix[(j, i)] = v.conj();
                    }
                }
                if hermitian {
                    matrix[(i, i)] = cplx(matrix[(i, i)].re);
                }
            }
        }
        Ok(Self::assemble(scheme, matrix, Some(spec.clone())))
    }

    /// Operator of a finite discrete kernel: unit weights, one block.
    pub fn from_discrete(kernel: &DiscreteKernel<T>) -> Self {
        Self::from_discrete_blocks(kernel, vec![0; kernel.len()]).expect("one block")
    }

    /// Operator of a finite discrete kernel whose sites are grouped into blocks.
    pub fn from_discrete_blocks(kernel: &DiscreteKernel<T>, blocks: Vec<usize>) -> Result<Self> {
        if blocks.len() != kernel.len() {
            return Err(Error::Constraint(format!("{} block labels for {} sites", blocks.len(), kernel.len())));
        }
        let labels = kernel.labels();
        let lo = labels.iter().fold(T::infinity(), |a, b| a.min(*b));
        let hi = labels.iter().fold(T::neg_infinity(), |a, b| a.max(*b));
        let window = if labels.is_empty() {
            Window::Interval(T::zero(), T::one())
        } else {
            Window::Interval(lo, hi.max(lo + T::one()))
        };
        let scheme = QuadratureScheme {
            window,
            nodes: labels.iter().map(|&x| Point::Lattice(x)).collect(),
            weights: vec![T::one(); labels.len()],
            blocks,
        };
        Ok(Self::assemble(scheme, kernel.matrix().clone(), None))
    }

    fn assemble(scheme: QuadratureScheme<T>, matrix: CMatrix<T>, spec: Option<KernelSpec<T>>) -> Self {
        Self { scheme, matrix, spec, eigenvalues: OnceLock::new(), eigen: OnceLock::new() }
    }

    pub fn spec(&self) -> Option<&KernelSpec<T>> {
        self.spec.as_ref()
    }

    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.rows() == 0
    }

    /// `sum_i w_i K(x_i, x_i)`
    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// Ascending spectrum (cached).
    pub fn eigenvalues(&self) -> &[T] {
        if let Some(e) = self.eigen.get() {
            return &e.values;
        }
        self.eigenvalues.get_or_init(|| hermitian_eigen(&self.matrix, false).values)
    }

    /// Spectrum with eigenvectors (cached).
    pub fn eigen(&self) -> &HermitianEigen<T> {
        self.eigen.get_or_init(|| hermitian_eigen(&self.matrix, true))
    }

    /// Number of distinct block labels.
    pub fn block_count(&self) -> usize {
        self.scheme.blocks.iter().copied().max().map_or(0, |b| b + 1)
    }

    /// `Var(#_B) = Tr(M) - ||M||_F^2`, which equals `sum lambda (1 - lambda)`.
    pub fn count_variance(&self) -> T {
        self.trace() - self.matrix.frobenius_sq()
    }

    /// `sum lambda (1 - lambda)` from the spectrum.
    pub fn count_variance_spectral(&self) -> T {
        self.eigenvalues().iter().fold(T::zero(), |acc, &l| acc + l * (T::one() - l))
    }
}

/// Spectral summary of the validity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport<T> {
    pub min_eig: T,
    pub max_eig: T,
    /// Verdict with the `1e-9` slack.
    pub is_valid: bool,
    /// Verdict without slack.
    pub is_valid_raw: bool,
}

/// `0 <= K <= 1` on a Hermitian matrix.
pub fn validity_check_matrix<T: Real>(m: &CMatrix<T>) -> Result<ValidityReport<T>> {
    let defect = m.hermitian_defect();
    let scale = T::one().max(m.frobenius_sq().sqrt());
    if defect > T::lit(1e-12) * scale {
        return Err(Error::NotHermitian(defect.as_f64()));
    }
    let values = hermitian_eigen(m, false).values;
    Ok(report_from_spectrum(&values))
}

fn report_from_spectrum<T: Real>(values: &[T]) -> ValidityReport<T> {
    let min_eig = values.first().copied().unwrap_or(T::zero());
    let max_eig = values.last().copied().unwrap_or(T::zero());
    let tol = T::lit(VALIDITY_TOL);
    ValidityReport {
        min_eig,
        max_eig,
        is_valid: min_eig >= -tol && max_eig <= T::one() + tol,
        is_valid_raw: min_eig >= T::zero() && max_eig <= T::one(),
    }
}

/// Validity of a discretised operator (uses the cached spectrum).
pub fn validity_check<T: Real>(op: &DiscretizedOperator<T>) -> Result<ValidityReport<T>> {
    let defect = op.matrix.hermitian_defect();
    if defect > T::zero() {
        return Err(Error::NotHermitian(defect.as_f64()));
    }
    Ok(report_from_spectrum(op.eigenvalues()))
}

/// `det(I + sum_j (z_j - 1) M Pi_j)` with `Pi_j` selecting the nodes of block `j`.
pub fn fredholm_genfun<T: Real>(op: &DiscretizedOperator<T>, z: &[Cplx<T>]) -> Result<Cplx<T>> {
    let blocks = op.block_count().max(1);
    if z.len() != blocks {
        return Err(Error::Constraint(format!("{} generating-function variables for {} blocks", z.len(), blocks)));
    }
    if z.iter().all(|v| v.is_one()) {
        return Ok(Complex::one());
    }
    let n = op.len();
    let mut a = CMatrix::from_fn(n, n, |i, j| op.matrix[(i, j)] * (z[op.scheme.blocks[j]] - Complex::one()));
    for i in 0..n {
        a[(i, i)] = a[(i, i)] + Complex::one();
    }
    Ok(log_det(&a).value())
}

/// `det(I - M)`, the probability that the window is empty.
pub fn gap_probability<T: Real>(op: &DiscretizedOperator<T>) -> T {
    let n = op.len();
    let mut a = CMatrix::from_fn(n, n, |i, j| -op.matrix[(i, j)]);
    for i in 0..n {
        a[(i, i)] = a[(i, i)] + Complex::one();
    }
    log_det(&a).value().re
}

/// One rung of a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rung<T> {
    pub order: usize,
    pub value: T,
}

/// Outcome of the order-doubling protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergence<T> {
    pub value: T,
    pub order: usize,
    pub ladder: Vec<Rung<T>>,
    pub converged: bool,
}

/// Default refinement tolerance and order cap.
pub const REFINE_TOL: f64 = 1e-9;
pub const REFINE_CAP: usize = 512;

/// Doubles the quadrature order from `start` until two successive values of
/// `functional` differ by less than `tol` or the order would exceed `cap`.
pub fn refine<T: Real>(
    spec: &KernelSpec<T>,
    window: &Window<T>,
    start: usize,
    tol: T,
    cap: usize,
    functional: impl Fn(&DiscretizedOperator<T>) -> Result<T>,
) -> Result<Convergence<T>> {
    let mut order = start.max(2);
    let mut ladder = Vec::new();
    let mut last: Option<T> = None;
    loop {
        let op = discretize(spec, window, order)?;
        let v = functional(&op)?;
        ladder.push(Rung { order, value: v });
        if let Some(prev) = last {
            if (v - prev).abs() < tol {
                return Ok(Convergence { value: v, order, ladder, converged: true });
            }
        }
        last = Some(v);
        if order * 2 > cap {
            return Ok(Convergence { value: v, order, ladder, converged: false });
        }
        order *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn traces_of_catalogue_examples() {
        let s = discretize(&KernelSpec::Sine, &Window::Interval(0.0, 1.0), 64).unwrap();
        assert_abs_diff_eq!(s.trace(), 1.0, epsilon = 1e-12);
        let h = discretize(&KernelSpec::HermiteN { n: 10 }, &Window::Interval(-8.0, 8.0), 128).unwrap();
        assert_abs_diff_eq!(h.trace(), 10.0, epsilon = 1e-6);
        let m = discretize(&KernelSpec::macchi(0.4, 1.0), &Window::Interval(0.0, 5.0), 96).unwrap();
        assert_abs_diff_eq!(m.trace(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn validity_examples() {
        let ok = DiscretizedOperator::from_discrete(&DiscreteKernel::diagonal(&[0.3, 0.7]));
        assert!(validity_check(&ok).unwrap().is_valid);
        let bad = DiscretizedOperator::from_discrete(&DiscreteKernel::diagonal(&[1.2]));
        let r = validity_check(&bad).unwrap();
        assert!(!r.is_valid);
        assert_abs_diff_eq!(r.max_eig, 1.2, epsilon = 1e-15);
        let s64 = discretize(&KernelSpec::Sine, &Window::Interval(0.0, 1.0), 64).unwrap();
        let s128 = discretize(&KernelSpec::Sine, &Window::Interval(0.0, 1.0), 128).unwrap();
        let r = validity_check(&s64).unwrap();
        assert!(r.is_valid && r.max_eig < 1.0);
        assert_abs_diff_eq!(r.max_eig, validity_check(&s128).unwrap().max_eig, epsilon = 1e-8);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = CMatrix::from_row_major(2, 2, vec![cplx(0.5), cplx(0.1), cplx(0.3), cplx(0.5)]);
        assert!(matches!(validity_check_matrix(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn genfun_simple_cases() {
        let d = DiscretizedOperator::from_discrete(&DiscreteKernel::diagonal(&[0.2, 0.6]));
        let z = Complex::new(0.3, -0.4);
        let one: Complex<f64> = Complex::one();
        let want = (one + (z - 1.0) * 0.2) * (one + (z - 1.0) * 0.6);
        assert_abs_diff_eq!((fredholm_genfun(&d, &[z]).unwrap() - want).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(fredholm_genfun(&d, &[Complex::one()]).unwrap(), Complex::one());
        let h1 = discretize(&KernelSpec::HermiteN { n: 1 }, &Window::Interval(-12.0, 12.0), 96).unwrap();
        assert_abs_diff_eq!((fredholm_genfun(&h1, &[z]).unwrap() - z).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn gap_probability_extremes() {
        let zero = DiscretizedOperator::from_discrete(&DiscreteKernel::diagonal(&[0.0, 0.0, 0.0]));
        assert_eq!(gap_probability(&zero), 1.0);
        let cue = discretize(&KernelSpec::CueN { n: 3 }, &Window::Interval(0.0, std::f64::consts::TAU), 48).unwrap();
        assert_abs_diff_eq!(gap_probability(&cue), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn sine_gap_refinement_converges() {
        for s in [0.5, 1.0, 2.0] {
            let c = refine(&KernelSpec::Sine, &Window::Interval(0.0, s), 8, 1e-9, 512, |op| Ok(gap_probability(op))).unwrap();
            assert!(c.converged);
            assert!(c.value > 0.0 && c.value < 1.0);
        }
    }
}
