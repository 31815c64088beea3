use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::DiscreteKernel;
use crate::linalg::hermitian_eigen;
use crate::operator::{validity_check_matrix, VALIDITY_TOL};

type C64 = Complex<f64>;

/// Spectral sampler for a finite DPP: pick eigenvectors independently with
/// probability `lambda_k`, then draw the projection DPP they span one site at
/// a time.
#[derive(Debug, Clone)]
pub struct DiscreteDppSampler {
    len: usize,
    values: Vec<f64>,
    /// eigenvectors, one `Vec` per eigenvalue
    columns: Vec<Vec<C64>>,
    /// inclusion probabilities when the kernel is diagonal (independent sites)
    diagonal: Option<Vec<f64>>,
}

impl DiscreteDppSampler {
    pub fn new(kernel: &DiscreteKernel<f64>) -> Result<Self> {
        let report = validity_check_matrix(kernel.matrix())?;
        if !report.is_valid {
            return Err(Error::InvalidKernel(format!(
                "spectrum [{}, {}] leaves [0, 1] by more than {VALIDITY_TOL}",
                report.min_eig, report.max_eig
            )));
        }
        let n = kernel.len();
        let m = kernel.matrix();
        let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm_sqr() == 0.0));
        if is_diagonal {
            let p = (0..n).map(|i| m[(i, i)].re.clamp(0.0, 1.0)).collect();
            return Ok(Self { len: n, values: Vec::new(), columns: Vec::new(), diagonal: Some(p) });
        }
        let eig = hermitian_eigen(kernel.matrix(), true);
        let v = eig.vectors.expect("eigenvectors requested");
        let columns = (0..n).map(|k| (0..n).map(|i| v[(i, k)]).collect()).collect();
        let values = eig.values.iter().map(|l| l.clamp(0.0, 1.0)).collect();
        Ok(Self { len: n, values, columns, diagonal: None })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Ascending indices of the sampled subset.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        if let Some(p) = &self.diagonal {
            return Ok((0..self.len).filter(|&i| p[i] >= 1.0 || rng.random::<f64>() < p[i]).collect());
        }
        let basis: Vec<&Vec<C64>> = self
            .values
            .iter()
            .zip(&self.columns)
            .filter(|(&l, _)| l >= 1.0 || rng.random::<f64>() < l)
            .map(|(_, c)| c)
            .collect();
        let k = basis.len();
        // p[j] is the diagonal of the conditional projection kernel; each pick
        // subtracts one rank-one term `e e^*` with `e = K(., i) / sqrt(K(i, i))`.
        let mut p: Vec<f64> = (0..self.len).map(|j| basis.iter().map(|c| c[j].norm_sqr()).sum()).collect();
        let mut done: Vec<Vec<C64>> = Vec::with_capacity(k);
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let total: f64 = p.iter().sum();
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (j, &v) in p.iter().enumerate() {
                acc += v;
                if u < acc {
                    pick = Some(j);
                    break;
                }
            }
            // rounding can leave `u` just above the final cumulative sum
            let i = match pick.or_else(|| (0..self.len).rev().find(|&j| p[j] > 0.0)) {
                Some(i) => i,
                None => return Err(Error::Sampler("empty conditional distribution".into())),
            };
            let mut e: Vec<C64> = (0..self.len)
                .map(|j| basis.iter().fold(C64::new(0.0, 0.0), |a, c| a + c[j] * c[i].conj()))
                .collect();
            for d in &done {
                let w = d[i].conj();
                for (x, y) in e.iter_mut().zip(d) {
                    *x -= y * w;
                }
            }
            let norm = e[i].re.max(f64::MIN_POSITIVE).sqrt();
            for (x, q) in e.iter_mut().zip(p.iter_mut()) {
                *x /= norm;
                *q = (*q - x.norm_sqr()).max(0.0);
            }
            p[i] = 0.0;
            out.push(i);
            done.push(e);
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// One draw from the DPP of `kernel`; see [`DiscreteDppSampler`].
pub fn sample_discrete_dpp<R: Rng + ?Sized>(kernel: &DiscreteKernel<f64>, rng: &mut R) -> Result<Vec<usize>> {
    DiscreteDppSampler::new(kernel)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::samplers::RngStream;

    #[test]
    fn identity_and_zero_kernels() {
        let mut rng = RngStream::new(1, 0).rng();
        let id = DiscreteKernel::from_matrix(CMatrix::identity(3)).unwrap();
        let zero = DiscreteKernel::diagonal(&[0.0; 3]);
        for _ in 0..50 {
            assert_eq!(sample_discrete_dpp(&id, &mut rng).unwrap(), vec![0, 1, 2]);
            assert!(sample_discrete_dpp(&zero, &mut rng).unwrap().is_empty());
        }
    }

    #[test]
    fn invalid_kernel_is_rejected() {
        let k = DiscreteKernel::diagonal(&[0.5, 1.5]);
        assert!(matches!(sample_discrete_dpp(&k, &mut RngStream::new(1, 0).rng()), Err(Error::InvalidKernel(_))));
    }
}
