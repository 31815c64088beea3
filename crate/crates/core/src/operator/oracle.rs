use crate::error::{Error, Result};
use crate::kernels::DiscreteKernel;
use crate::linalg::det;
use crate::scalar::Real;

/// Largest ground set the exhaustive oracle accepts.
pub const MAX_ORACLE_SITES: usize = 14;

/// Law of a finite DPP over all `2^n` configurations; bit `i` of the index
/// marks site `i` as occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDistribution<T> {
    pub sites: usize,
    pub probabilities: Vec<T>,
    /// `det(K_S)` for every subset `S`.
    pub minors: Vec<T>,
}

/// `P(exactly S) = sum_{T >= S} (-1)^{|T \ S|} det(K_T)` for every `S`.
pub fn brute_force_oracle<T: Real>(kernel: &DiscreteKernel<T>) -> Result<OracleDistribution<T>> {
    let n = kernel.len();
    if n > MAX_ORACLE_SITES {
        return Err(Error::TooLarge { size: n, max: MAX_ORACLE_SITES });
    }
    let total = 1usize << n;
    let mut minors = vec![T::zero(); total];
    let mut idx = Vec::with_capacity(n);
    for (mask, slot) in minors.iter_mut().enumerate() {
        idx.clear();
        idx.extend((0..n).filter(|b| mask >> b & 1 == 1));
        *slot = if idx.is_empty() { T::one() } else { det(&kernel.matrix().submatrix(&idx)).re };
    }
    // superset Moebius transform, one coordinate at a time
    let mut p = minors.clone();
    for b in 0..n {
        for mask in 0..total {
            if mask >> b & 1 == 0 {
                let with = p[mask | 1 << b];
                p[mask] = p[mask] - with;
            }
        }
    }
    Ok(OracleDistribution { sites: n, probabilities: p, minors })
}

impl<T: Real> OracleDistribution<T> {
    /// Law of the total particle number.
    pub fn count_distribution(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.sites + 1];
        for (mask, &p) in self.probabilities.iter().enumerate() {
            out[mask.count_ones() as usize] = out[mask.count_ones() as usize] + p;
        }
        out
    }

    /// Joint law of the counts in each block; `blocks[i]` is the block of site `i`.
    /// Returned as `(counts per block, probability)` pairs over all configurations.
    pub fn block_counts(&self, blocks: &[usize]) -> Vec<(Vec<usize>, T)> {
        let nb = blocks.iter().copied().max().map_or(0, |b| b + 1);
        self.probabilities
            .iter()
            .enumerate()
            .map(|(mask, &p)| {
                let mut c = vec![0usize; nb];
                for (i, &b) in blocks.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        c[b] += 1;
                    }
                }
                (c, p)
            })
            .collect()
    }

    /// `E[#(# - 1)...(# - m + 1)]`
    pub fn factorial_moment(&self, m: usize) -> T {
        self.count_distribution().iter().enumerate().fold(T::zero(), |acc, (k, &p)| {
            if k < m {
                acc
            } else {
                let f = (k - m + 1..=k).fold(1.0f64, |a, v| a * v as f64);
                acc + p * T::lit(f)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trivial_kernels() {
        let zero = DiscreteKernel::diagonal(&[0.0; 4]);
        let o = brute_force_oracle(&zero).unwrap();
        assert_eq!(o.probabilities[0], 1.0);
        let id = DiscreteKernel::diagonal(&[1.0; 4]);
        let o = brute_force_oracle(&id).unwrap();
        assert_abs_diff_eq!(o.probabilities[15], 1.0, epsilon = 1e-15);
        let p = [0.1, 0.5, 0.25, 0.9, 0.33];
        let o = brute_force_oracle(&DiscreteKernel::diagonal(&p)).unwrap();
        for (mask, prob) in o.probabilities.iter().enumerate() {
            let want: f64 = (0..5).map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] }).product();
            assert_abs_diff_eq!(*prob, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn size_guard() {
        let k = DiscreteKernel::from_matrix(CMatrix::<f64>::zeros(15, 15)).unwrap();
        assert!(matches!(brute_force_oracle(&k), Err(Error::TooLarge { .. })));
    }
}
