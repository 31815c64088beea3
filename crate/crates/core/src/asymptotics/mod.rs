//! Spectral measure and variance growth of translation-invariant fields,
//! covariance decay, and Monte Carlo central-limit harnesses.

mod clt;
mod compare;
mod spectral;
mod summary;

pub use clt::{
    clt_counts, clt_spacings, renewal_count_moments, spacing_counts, spacing_counts_periodic, CltReport, CountModel,
    SpacingModel, SpacingReport, SpacingRow, BOUNDED_GROWTH_RATIO,
};
pub use compare::{
    cumulant_comparison, discrete_sampler_comparison, lpp_comparison, plancherel_comparison, plancherel_conditional, standard_tableaux_count,
    BandRow, BandTable,
};
pub use spectral::{
    count_variance, covariance_decay, cue_arc_moments, hermite_sine_scaling_error, kernel_transform, nystrom_count_moments,
    bounded_variance_moments, bounded_variance_limit, spectral_density, spectral_measure, SpectralMeasureTable, VarianceEstimate,
    KINKED_VARIANCE_TOL, VARIANCE_TOL,
};
pub use summary::{
    binomial_band, ks_critical, ks_critical_two_sample, ks_normal_lattice, ks_one_sample, ks_two_sample, normal_cdf,
    CountSummary, SUMMARY_ORDER,
};
