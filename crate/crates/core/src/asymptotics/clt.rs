use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{bounded_variance_eigenvalue, DiscreteKernel, KernelSpec};
use crate::quadrature::Window;
use crate::renewal::{renewal_density_series, IntervalLaw, RenewalSpec};
use crate::samplers::{run_replicas, DiscreteDppSampler, ProjectionSampler, RenewalSampler};

use super::spectral::{cue_arc_moments, nystrom_count_moments, piecewise_integral};
use super::summary::{ks_normal_lattice, CountSummary};

/// A point process that can be sampled exactly, with a window whose count
/// is studied.
#[derive(Debug, Clone)]
pub enum CountModel {
    /// Rank-`n` projection ensemble, counted on `[a, b]`.
    Projection { spec: KernelSpec<f64>, window: (f64, f64) },
    /// Finite DPP, counted on the whole ground set.
    Discrete { kernel: DiscreteKernel<f64> },
    /// Bounded-variance kernel, counted on `[-n, n]`.
    BoundedVariance { n: usize },
    /// Stationary renewal process counted on `[a, b]`, `a >= 0`.
    Renewal { spec: RenewalSpec, window: (f64, f64) },
}

/// Growth ratios below this mean the count variance is levelling off.
pub const BOUNDED_GROWTH_RATIO: f64 = 0.75;

impl CountModel {
    pub fn name(&self) -> String {
        match self {
            CountModel::Projection { spec, window } => format!("{} on [{}, {}]", spec.name(), window.0, window.1),
            CountModel::Discrete { kernel } => format!("discrete kernel on {} sites", kernel.len()),
            CountModel::BoundedVariance { n } => format!("bounded-variance kernel on [-{n}, {n}]"),
            CountModel::Renewal { window, .. } => format!("renewal process on [{}, {}]", window.0, window.1),
        }
    }

    /// Exact mean and variance of the count.
    pub fn moments(&self) -> Result<(f64, f64)> {
        match self {
            CountModel::Projection { spec, window } => match *spec {
                KernelSpec::CueN { n } => Ok(cue_arc_moments(n, window.0, window.1)),
                _ => {
                    let n = spec.rank().unwrap_or(1) as f64;
                    let panel = ((window.1 - window.0) / n.max(1.0)).max(1e-3);
                    let w = Window::Interval(window.0, window.1);
                    let coarse = nystrom_count_moments(spec, &w, panel, 12)?;
                    let fine = nystrom_count_moments(spec, &w, panel, 20)?;
                    if (coarse.1 - fine.1).abs() > 1e-8 * fine.1.abs().max(1.0) {
                        return Err(Error::NonConvergence(format!("count variance {} vs {}", coarse.1, fine.1)));
                    }
                    Ok(fine)
                }
            },
            CountModel::Discrete { kernel } => {
                let m = kernel.matrix();
                let trace: f64 = (0..kernel.len()).map(|i| m[(i, i)].re).sum();
                Ok((trace, trace - m.frobenius_sq()))
            }
            CountModel::BoundedVariance { n } => Ok(super::spectral::bounded_variance_moments(*n)),
            CountModel::Renewal { spec, window } => renewal_count_moments(spec, window.1 - window.0),
        }
    }

    /// The same model `factor` times larger along its natural growth direction.
    pub fn scaled(&self, factor: usize) -> Result<CountModel> {
        Ok(match self {
            CountModel::Projection { spec, window } => {
                let spec = match *spec {
                    KernelSpec::CueN { n } => KernelSpec::CueN { n: n * factor },
                    KernelSpec::HermiteN { n } => KernelSpec::HermiteN { n: n * factor },
                    KernelSpec::SoEven { n } => KernelSpec::SoEven { n: n * factor },
                    KernelSpec::SoOdd { n } => KernelSpec::SoOdd { n: n * factor },
                    KernelSpec::Sp { n } => KernelSpec::Sp { n: n * factor },
                    _ => return Err(Error::Unsupported(format!("no growth family for {}", spec.name()))),
                };
                CountModel::Projection { spec, window: *window }
            }
            CountModel::Discrete { kernel } => {
                // block-diagonal copies of the kernel are independent copies of the process
                let n = kernel.len();
                let big = crate::linalg::CMatrix::from_fn(n * factor, n * factor, |i, j| {
                    if i / n == j / n {
                        kernel.matrix()[(i % n, j % n)]
                    } else {
                        num_complex::Complex::new(0.0, 0.0)
                    }
                });
                CountModel::Discrete { kernel: DiscreteKernel::from_matrix(big)? }
            }
            CountModel::BoundedVariance { n } => CountModel::BoundedVariance { n: n * factor },
            CountModel::Renewal { spec, window } => {
                CountModel::Renewal { spec: spec.clone(), window: (window.0, window.0 + (window.1 - window.0) * factor as f64) }
            }
        })
    }

    fn sampler(&self) -> Result<CountSampler> {
        Ok(match self {
            CountModel::Projection { spec, window } => CountSampler::Projection(ProjectionSampler::new(spec)?, *window),
            CountModel::Discrete { kernel } => CountSampler::Discrete(DiscreteDppSampler::new(kernel)?),
            CountModel::BoundedVariance { n } => {
                let n = *n as i64;
                let mu: Vec<f64> = (-n..n).map(|k| bounded_variance_eigenvalue(k as f64)).collect();
                CountSampler::Discrete(DiscreteDppSampler::new(&DiscreteKernel::diagonal(&mu))?)
            }
            CountModel::Renewal { spec, window } => {
                if window.0 < 0.0 {
                    return Err(Error::Constraint("renewal windows start at or after 0".into()));
                }
                CountSampler::Renewal(RenewalSampler::new(spec)?, *window)
            }
        })
    }
}

enum CountSampler {
    Projection(ProjectionSampler, (f64, f64)),
    Discrete(DiscreteDppSampler),
    Renewal(RenewalSampler, (f64, f64)),
}

impl CountSampler {
    fn count<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<i64> {
        Ok(match self {
            CountSampler::Projection(s, (a, b)) => s.sample(rng)?.count_in(*a, *b) as i64,
            CountSampler::Discrete(s) => s.sample(rng)?.len() as i64,
            CountSampler::Renewal(s, (a, b)) => s.sample(*b, rng).count_in(*a, *b) as i64,
        })
    }
}

/// `Var #[0, t] = rho t + 2 rho int_0^t (t - s)(u(s) - rho) ds` for a stationary renewal process.
pub fn renewal_count_moments(spec: &RenewalSpec, t: f64) -> Result<(f64, f64)> {
    let rho = spec.intensity();
    let u = match renewal_density_series(spec)? {
        IntervalLaw::Density(u) => u,
        IntervalLaw::Lattice(_) => return Err(Error::Unsupported("lattice renewal counts".into())),
    };
    if t > u.x_max() {
        return Err(Error::Constraint(format!("window {t} exceeds the tabulated range {}", u.x_max())));
    }
    let h = u.step;
    let tail = piecewise_integral(|s| (t - s) * (u.eval(s) - rho), 0.0, t, &[], 8.0 * h, 8);
    Ok((rho * t, rho * t + 2.0 * rho * tail))
}

/// Outcome of a Monte Carlo CLT check for counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub model: String,
    /// exact mean and variance used to standardise
    pub mean: f64,
    pub var: f64,
    pub sample_mean: f64,
    pub sample_var: f64,
    /// Kolmogorov distance of the standardised counts to `N(0, 1)`
    pub ks: f64,
    pub replicas: usize,
    pub seed: u64,
    /// variance at least 1
    pub clt_regime: bool,
    /// exact variances along the growth family (factors 1, 2, 4, 8)
    pub growth: Vec<f64>,
    /// whether the growth family has diverging variance
    pub variance_diverges: bool,
}

/// Samples the count `replicas` times and compares with the normal law.
pub fn clt_counts(model: &CountModel, replicas: usize, seed: u64, threads: usize) -> Result<CltReport> {
    let (mean, var) = model.moments()?;
    let growth = [1usize, 2, 4, 8].iter().map(|&f| model.scaled(f).and_then(|m| m.moments()).map(|m| m.1)).collect::<Result<Vec<_>>>()?;
    let inc: Vec<f64> = growth.windows(2).map(|w| w[1] - w[0]).collect();
    let variance_diverges = inc.windows(2).all(|w| w[0] > 0.0 && w[1] >= BOUNDED_GROWTH_RATIO * w[0]);
    let sampler = model.sampler()?;
    let counts = run_replicas(seed, replicas, threads, |_, rng| sampler.count(rng)).into_iter().collect::<Result<Vec<i64>>>()?;
    let summary = CountSummary::from_values(counts.iter().map(|&c| c as f64));
    Ok(CltReport {
        model: model.name(),
        mean,
        var,
        sample_mean: summary.mean,
        sample_var: summary.variance(),
        ks: ks_normal_lattice(&counts, mean, var.sqrt()),
        replicas,
        seed,
        clt_regime: var >= 1.0,
        growth,
        variance_diverges,
    })
}

/// `#{x_i in [-L, L] : #(x_i + B) = n_required}` for `B = (lo, hi]`, on a
/// sorted configuration.
pub fn spacing_counts(points: &[f64], b: (f64, f64), n_required: usize, l: f64) -> usize {
    points
        .iter()
        .filter(|&&x| x >= -l && x <= l)
        .filter(|&&x| points.partition_point(|&y| y <= x + b.1) - points.partition_point(|&y| y <= x + b.0) == n_required)
        .count()
}

/// Same statistic on a circle of circumference `period`, every point counted.
pub fn spacing_counts_periodic(points: &[f64], period: f64, b: (f64, f64), n_required: usize) -> usize {
    let mut ext = points.to_vec();
    ext.extend(points.iter().map(|x| x + period));
    points
        .iter()
        .filter(|&&x| ext.partition_point(|&y| y <= x + b.1) - ext.partition_point(|&y| y <= x + b.0) == n_required)
        .count()
}

/// Model for the spacing statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum SpacingModel {
    /// Poisson process of intensity `rho`; sizes are half-widths `L`.
    Poisson { rho: f64 },
    /// `CUE(n)` in mean-density-one coordinates on a circle of length `n`;
    /// sizes are `n`.
    Cue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingRow {
    pub size: f64,
    pub mean: f64,
    pub var: f64,
    pub var_over_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingReport {
    pub rows: Vec<SpacingRow>,
    /// least-squares slope of `var` against size through the origin
    pub slope: f64,
    /// largest relative deviation of `var/size` from the mean ratio
    pub ratio_spread: f64,
    /// Kolmogorov distance to normal at the largest size (sample-standardised)
    pub ks: f64,
    pub replicas: usize,
    pub seed: u64,
}

pub fn clt_spacings(
    model: &SpacingModel,
    b: (f64, f64),
    sizes: &[f64],
    replicas: usize,
    seed: u64,
    threads: usize,
) -> Result<SpacingReport> {
    if !(b.0 >= 0.0 && b.1 > b.0) {
        return Err(Error::Constraint(format!("B = ({}, {}] must be a bounded interval away from the origin", b.0, b.1)));
    }
    if sizes.is_empty() {
        return Err(Error::Constraint("no sizes given".into()));
    }
    let mut rows = Vec::new();
    let mut last = Vec::new();
    for (s_idx, &size) in sizes.iter().enumerate() {
        let stream_seed = seed.wrapping_add((s_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let values: Vec<i64> = match model {
            SpacingModel::Poisson { rho } => {
                let spec = RenewalSpec::exponential(*rho)?;
                let sampler = RenewalSampler::new(&spec)?;
                run_replicas(stream_seed, replicas, threads, |_, rng| {
                    let path = sampler.sample(2.0 * size + b.1, rng);
                    let shifted: Vec<f64> = path.points.iter().map(|x| x - size).collect();
                    spacing_counts(&shifted, b, 0, size) as i64
                })
            }
            SpacingModel::Cue => {
                let n = size.round() as usize;
                let sampler = ProjectionSampler::new(&KernelSpec::CueN { n })?;
                let scale = n as f64 / std::f64::consts::TAU;
                run_replicas(stream_seed, replicas, threads, |_, rng| {
                    sampler.sample(rng).map(|c| {
                        let pts: Vec<f64> = c.points.iter().map(|t| t * scale).collect();
                        spacing_counts_periodic(&pts, n as f64, b, 0) as i64
                    })
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?
            }
        };
        let s = CountSummary::from_values(values.iter().map(|&v| v as f64));
        rows.push(SpacingRow { size, mean: s.mean, var: s.variance(), var_over_size: s.variance() / size });
        last = values;
    }
    let slope = rows.iter().map(|r| r.size * r.var).sum::<f64>() / rows.iter().map(|r| r.size * r.size).sum::<f64>();
    let mean_ratio = rows.iter().map(|r| r.var_over_size).sum::<f64>() / rows.len() as f64;
    let ratio_spread = rows.iter().map(|r| (r.var_over_size / mean_ratio - 1.0).abs()).fold(0.0, f64::max);
    let s = CountSummary::from_values(last.iter().map(|&v| v as f64));
    let ks = ks_normal_lattice(&last, s.mean, s.variance().sqrt());
    Ok(SpacingReport { rows, slope, ratio_spread, ks, replicas, seed })
}
