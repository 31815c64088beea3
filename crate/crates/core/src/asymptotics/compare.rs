//! Empirical frequencies against exact predictions with binomial bands.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{build_discrete_kernel, DiscreteKernel, KernelSpec};
use crate::operator::{brute_force_oracle, cluster_integrals, cumulants_from_cluster_integrals, DiscretizedOperator};
use crate::samplers::{
    last_passage_cdf, run_replicas, sample_last_passage, sample_plancherel_of_size, sample_plancherel_poissonized,
    DiscreteDppSampler,
};

use super::summary::{binomial_band, CountSummary};

/// Width of the bands in standard deviations.
pub const BAND_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandRow {
    pub label: String,
    pub predicted: f64,
    pub empirical: f64,
    pub sigma: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandTable {
    pub rows: Vec<BandRow>,
    pub trials: usize,
    pub seed: u64,
    /// rows outside their band
    pub excursions: usize,
}

impl BandTable {
    fn from_hits(rows: impl IntoIterator<Item = (String, f64, usize)>, trials: usize, seed: u64) -> Self {
        let rows: Vec<BandRow> = rows
            .into_iter()
            .map(|(label, p, hits)| {
                let (inside, sigma) = binomial_band(hits, trials, p, BAND_SIGMAS);
                BandRow { label, predicted: p, empirical: hits as f64 / trials as f64, sigma, inside }
            })
            .collect();
        let excursions = rows.iter().filter(|r| !r.inside).count();
        Self { rows, trials, seed, excursions }
    }

    pub fn all_inside(&self) -> bool {
        self.excursions == 0
    }

    /// Expected number of rows outside a 3-sigma band under the null.
    pub fn expected_excursions(&self) -> f64 {
        self.rows.len() as f64 * 0.0027
    }
}

/// Frequencies of every configuration of a small DPP against the exhaustive oracle.
pub fn discrete_sampler_comparison(kernel: &DiscreteKernel<f64>, draws: usize, seed: u64, threads: usize) -> Result<BandTable> {
    let oracle = brute_force_oracle(kernel)?;
    let sampler = DiscreteDppSampler::new(kernel)?;
    let masks = run_replicas(seed, draws, threads, |_, rng| sampler.sample(rng).map(|s| s.iter().fold(0usize, |m, &i| m | 1 << i)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut hits = vec![0usize; oracle.probabilities.len()];
    for m in masks {
        hits[m] += 1;
    }
    let n = kernel.len();
    let rows = oracle.probabilities.iter().zip(&hits).enumerate().map(|(mask, (&p, &h))| {
        let label: String = (0..n).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect();
        (label, p.clamp(0.0, 1.0), h)
    });
    Ok(BandTable::from_hits(rows, draws, seed))
}

/// `P(G(M, N) <= t)` from simulation against the Meixner Fredholm determinant.
pub fn lpp_comparison(m: usize, n: usize, q: f64, ts: &[u64], replicas: usize, seed: u64, threads: usize) -> Result<BandTable> {
    let samples = run_replicas(seed, replicas, threads, |_, rng| sample_last_passage(m, n, q, rng))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rows = ts
        .iter()
        .map(|&t| Ok((format!("{t}"), last_passage_cdf(m, n, q, t)?, samples.iter().filter(|&&g| g <= t).count())))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandTable::from_hits(rows, replicas, seed))
}

/// One-point function of the modified Frobenius coordinates of poissonized
/// Plancherel diagrams on `{±1/2, ..., ±(max_half + 1/2)}` against the
/// discrete Bessel diagonal.
pub fn plancherel_comparison(theta: f64, max_half: usize, replicas: usize, seed: u64, threads: usize) -> Result<BandTable> {
    let sites: Vec<f64> = (0..=max_half).rev().map(|k| -(k as f64) - 0.5).chain((0..=max_half).map(|k| k as f64 + 0.5)).collect();
    // only the diagonal is read, and it is real on both sides of the origin
    let kernel = build_discrete_kernel(&KernelSpec::DiscreteBessel { theta, allow_mixed_sign: true }, &sites)?;
    let samples = run_replicas(seed, replicas, threads, |_, rng| sample_plancherel_poissonized(theta, rng))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut hits = vec![0usize; sites.len()];
    for s in &samples {
        for x in &s.frobenius {
            if let Some(i) = sites.iter().position(|y| y == x) {
                hits[i] += 1;
            }
        }
    }
    let rows = sites.iter().enumerate().map(|(i, x)| (format!("{x}"), kernel.matrix()[(i, i)].re, hits[i]));
    Ok(BandTable::from_hits(rows, replicas, seed))
}

/// Number of standard Young tableaux of a shape (hook length formula).
pub fn standard_tableaux_count(shape: &[usize]) -> f64 {
    let n: usize = shape.iter().sum();
    let conj = |j: usize| shape.iter().take_while(|&&l| l > j).count();
    let mut log = (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    for (i, &l) in shape.iter().enumerate() {
        for j in 0..l {
            let hook = (l - j - 1) + (conj(j) - i - 1) + 1;
            log -= (hook as f64).ln();
        }
    }
    log.exp().round()
}

fn partitions(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if n == 0 {
        out.push(prefix.clone());
        return;
    }
    for first in (1..=n.min(max)).rev() {
        prefix.push(first);
        partitions(n - first, first, prefix, out);
        prefix.pop();
    }
}

/// Shapes of RSK-sampled diagrams with `n` boxes against `(dim lambda)^2 / n!`.
pub fn plancherel_conditional(n: usize, replicas: usize, seed: u64, threads: usize) -> Result<BandTable> {
    if n == 0 || n > 12 {
        return Err(Error::Constraint(format!("conditional comparison supports 1 <= n <= 12, got {n}")));
    }
    let mut shapes = Vec::new();
    partitions(n, n, &mut Vec::new(), &mut shapes);
    let n_fact: f64 = (1..=n).map(|k| k as f64).product();
    let samples = run_replicas(seed, replicas, threads, |_, rng| sample_plancherel_of_size(n, rng).shape);
    let rows = shapes.iter().map(|s| {
        let d = standard_tableaux_count(s);
        let label = s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        (format!("({label})"), d * d / n_fact, samples.iter().filter(|x| *x == s).count())
    });
    Ok(BandTable::from_hits(rows, replicas, seed))
}

/// Count cumulants `C_1..C_order` of a small DPP from `draws` samples,
/// against the cluster-integral prediction. The standard error of each
/// cumulant comes from the spread of `batches` equal batch estimates.
pub fn cumulant_comparison(
    kernel: &DiscreteKernel<f64>,
    order: usize,
    draws: usize,
    batches: usize,
    seed: u64,
    threads: usize,
) -> Result<BandTable> {
    if batches < 2 || draws < 2 * batches {
        return Err(Error::Constraint(format!("{draws} draws cannot fill {batches} batches of at least two")));
    }
    let op = DiscretizedOperator::from_discrete(kernel);
    let predicted = cumulants_from_cluster_integrals(&cluster_integrals(&op, order)?)?;
    let sampler = DiscreteDppSampler::new(kernel)?;
    let per_batch = draws / batches;
    let summaries = run_replicas(seed, batches, threads, |_, rng| {
        let mut s = CountSummary::new();
        for _ in 0..per_batch {
            s.push(sampler.sample(rng)?.len() as f64);
        }
        Ok(s)
    })
    .into_iter()
    .collect::<Result<Vec<CountSummary>>>()?;
    let whole = summaries.iter().fold(CountSummary::new(), |acc, s| acc.merge(s));
    let empirical = whole.cumulants(order);
    let per: Vec<Vec<f64>> = summaries.iter().map(|s| s.cumulants(order)).collect();
    let b = batches as f64;
    let rows: Vec<BandRow> = (0..order)
        .map(|k| {
            let mean = per.iter().map(|c| c[k]).sum::<f64>() / b;
            let var = per.iter().map(|c| (c[k] - mean).powi(2)).sum::<f64>() / (b - 1.0);
            let sigma = (var / b).sqrt();
            BandRow {
                label: format!("C{}", k + 1),
                predicted: predicted[k],
                empirical: empirical[k],
                sigma,
                inside: (empirical[k] - predicted[k]).abs() <= BAND_SIGMAS * sigma,
            }
        })
        .collect();
    let excursions = rows.iter().filter(|r| !r.inside).count();
    Ok(BandTable { rows, trials: per_batch * batches, seed, excursions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hook_lengths() {
        assert_eq!(standard_tableaux_count(&[2, 1]), 2.0);
        assert_eq!(standard_tableaux_count(&[3, 2]), 5.0);
        assert_eq!(standard_tableaux_count(&[3, 2, 1]), 16.0);
        let mut all = Vec::new();
        partitions(5, 5, &mut Vec::new(), &mut all);
        assert_eq!(all.len(), 7);
        let total: f64 = all.iter().map(|s| standard_tableaux_count(s).powi(2)).sum();
        assert_eq!(total, 120.0);
    }
}
