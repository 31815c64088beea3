use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// Largest poissonization parameter accepted.
pub const MAX_THETA: f64 = 100.0;

/// A Young diagram with its modified Frobenius coordinates
/// `{p_i + 1/2} ∪ {-q_i - 1/2}` (ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct PlancherelSample {
    pub n: usize,
    pub shape: Vec<usize>,
    pub frobenius: Vec<f64>,
}

/// Shape of the RSK insertion tableau of a sequence of distinct values.
pub fn rsk_shape(word: &[usize]) -> Vec<usize> {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for &x in word {
        let mut x = x;
        let mut r = 0;
        loop {
            if r == rows.len() {
                rows.push(vec![x]);
                break;
            }
            let row = &mut rows[r];
            let pos = row.partition_point(|&y| y < x);
            if pos == row.len() {
                row.push(x);
                break;
            }
            std::mem::swap(&mut row[pos], &mut x);
            r += 1;
        }
    }
    rows.iter().map(Vec::len).collect()
}

pub fn frobenius_coordinates(shape: &[usize]) -> Vec<f64> {
    let conj = |j: usize| shape.iter().take_while(|&&l| l > j).count();
    let mut out = Vec::new();
    for (i, &l) in shape.iter().enumerate() {
        if l <= i {
            break;
        }
        out.push((l - i - 1) as f64 + 0.5);
        out.push(-((conj(i) - i - 1) as f64) - 0.5);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Plancherel-distributed diagram with `n` boxes (RSK of a uniform permutation).
pub fn sample_plancherel_of_size<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PlancherelSample {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let shape = rsk_shape(&perm);
    let frobenius = frobenius_coordinates(&shape);
    PlancherelSample { n, shape, frobenius }
}

/// Poissonized Plancherel measure: `n ~ Poisson(theta)` boxes.
pub fn sample_plancherel_poissonized<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> Result<PlancherelSample> {
    if !(theta > 0.0 && theta <= MAX_THETA) {
        return Err(Error::Constraint(format!("theta = {theta} must lie in (0, {MAX_THETA}]")));
    }
    let n = Poisson::new(theta).map_err(|e| Error::Sampler(e.to_string()))?.sample(rng) as usize;
    Ok(sample_plancherel_of_size(n, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_shapes() {
        assert_eq!(rsk_shape(&[0]), vec![1]);
        assert_eq!(rsk_shape(&[0, 1, 2]), vec![3]);
        assert_eq!(rsk_shape(&[2, 1, 0]), vec![1, 1, 1]);
        assert_eq!(rsk_shape(&[1, 2, 0]), vec![2, 1]);
        assert_eq!(frobenius_coordinates(&[1]), vec![-0.5, 0.5]);
        assert_eq!(frobenius_coordinates(&[3, 1]), vec![-1.5, 2.5]);
        assert_eq!(frobenius_coordinates(&[2, 2]), vec![-1.5, -0.5, 0.5, 1.5]);
        assert!(frobenius_coordinates(&[]).is_empty());
    }
}
