mod common;

use detfield::asymptotics::*;
use detfield::kernels::bounded_variance_eigenvalue;
use detfield::renewal::macchi_interval_density;
use detfield::{DiscreteKernel, KernelSpec};
use proptest::prelude::*;

#[test]
fn sine_variance_grows_like_log() {
    let ls = [10.0f64, 20.0, 40.0, 80.0, 160.0];
    let vs: Vec<f64> = ls
        .iter()
        .map(|&l| {
            let v = count_variance(&KernelSpec::Sine, l).unwrap();
            assert!((v.variance - v.double_integral).abs() < 1e-6, "L={l}");
            v.variance
        })
        .collect();
    let xs: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 5.0;
    let my = vs.iter().sum::<f64>() / 5.0;
    let slope = xs.iter().zip(&vs).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let target = 1.0 / std::f64::consts::PI.powi(2);
    assert!((slope / target - 1.0).abs() < 0.15, "slope {slope}");
}

#[test]
fn exponential_kernel_variance_is_linear() {
    let spec = KernelSpec::macchi(0.4, 1.0);
    let v = count_variance(&spec, 50.0).unwrap();
    assert!((v.variance - v.double_integral).abs() < 1e-6);
    // spectral density at the origin: rho - rho^2 alpha = 0.24
    assert!((v.variance / 100.0 / 0.24 - 1.0).abs() < 0.02);
    assert!((v.mean - 40.0).abs() < 1e-12);
}

#[test]
fn bounded_variance_kernel() {
    let bound = bounded_variance_limit();
    let direct: f64 = (-2000i64..=2000)
        .map(|k| {
            let kk = (k * k) as f64 + 1.0;
            (1.0 - 1.0 / kk) / kk
        })
        .sum();
    assert!((bound - direct).abs() < 1e-3);
    for n in 1..=50 {
        let (mean, var) = bounded_variance_moments(n);
        assert!(var < bound, "n={n}");
        let direct: f64 = (-(n as i64)..n as i64).map(|k| bounded_variance_eigenvalue(k as f64)).sum();
        assert!((mean - direct).abs() < 1e-9);
    }
    assert!(bounded_variance_moments(50).0 > 50.0);
}

#[test]
fn spectral_measure_shapes() {
    let sine = spectral_measure(&KernelSpec::Sine, 12.0, 601).unwrap();
    for (l, d) in sine.lambda.iter().zip(&sine.density) {
        assert!((d - (l.abs() / std::f64::consts::TAU).min(1.0)).abs() < 1e-8);
        assert!(*d >= 0.0 && *d <= sine.k0);
    }
    let macchi = spectral_measure(&KernelSpec::macchi(0.4, 1.0), 12.0, 601).unwrap();
    for d in &macchi.density {
        assert!(*d >= 0.0 && *d <= macchi.k0 + 1e-15);
    }
    let at_zero = spectral_density(&KernelSpec::macchi(0.4, 1.0), 0.0).unwrap();
    assert!((at_zero - 0.24).abs() < 1e-12);
}

#[test]
fn covariance_decays_monotonically() {
    let seps: Vec<f64> = (0..30).map(|i| i as f64 * 0.5).collect();
    let c = covariance_decay(&KernelSpec::macchi(0.4, 1.0), 2.0, &seps).unwrap();
    assert!(c.windows(2).all(|w| w[1].abs() <= w[0].abs()));
    assert!(c.last().unwrap().abs() < 1e-8);
}

#[test]
fn cue_arc_counts_are_gaussian_enough() {
    let model = CountModel::Projection { spec: KernelSpec::CueN { n: 30 }, window: (0.0, std::f64::consts::PI) };
    let r = clt_counts(&model, 2000, 3, 2).unwrap();
    assert_eq!(r.mean, 15.0);
    assert!(r.variance_diverges);
    assert!(r.ks < 0.06, "{r:?}");
    assert!((r.sample_var / r.var - 1.0).abs() < 0.15);
}

#[test]
fn bounded_variance_kernel_is_flagged() {
    let r = clt_counts(&CountModel::BoundedVariance { n: 20 }, 500, 4, 1).unwrap();
    assert!(!r.variance_diverges);
    let bern = clt_counts(&CountModel::Discrete { kernel: DiscreteKernel::diagonal(&[0.5; 400]) }, 2000, 5, 1).unwrap();
    assert!(bern.variance_diverges && bern.clt_regime);
    assert!(bern.ks < 0.03, "{}", bern.ks);
}

#[test]
fn renewal_count_variance_matches_spectral_route() {
    let spec = macchi_interval_density(0.4, 1.0).unwrap();
    let (mean, var) = renewal_count_moments(&spec, 20.0).unwrap();
    let dpp = count_variance(&KernelSpec::macchi(0.4, 1.0), 10.0).unwrap();
    assert!((mean - 8.0).abs() < 1e-9);
    assert!((var - dpp.variance).abs() < 1e-5, "{var} vs {}", dpp.variance);
}

#[test]
fn poisson_spacing_counts() {
    let r = clt_spacings(&SpacingModel::Poisson { rho: 1.0 }, (0.0, 1.0), &[25.0, 50.0, 100.0], 400, 6, 2).unwrap();
    // #{x in [-L, L]: next point beyond x + 1} has mean 2L e^{-1}
    for row in &r.rows {
        let want = 2.0 * row.size * (-1.0f64).exp();
        assert!((row.mean - want).abs() < 5.0 * (row.var / 400.0).sqrt());
    }
    assert!(r.ratio_spread < 0.2);
}

#[test]
fn ks_helpers() {
    assert!(ks_critical(100, 0.05) > ks_critical(1000, 0.05));
    let x: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
    assert!(ks_one_sample(&x, |v| v.clamp(0.0, 1.0)) < 1e-3 + 1e-12);
    assert_eq!(ks_two_sample(&x, &x), 0.0);
    let (inside, sigma) = binomial_band(500, 1000, 0.5, 3.0);
    assert!(inside && (sigma - (0.25f64 / 1000.0).sqrt()).abs() < 1e-15);
    assert!(!binomial_band(600, 1000, 0.5, 3.0).0);
}

proptest! {
    #[test]
    fn summary_merge_equals_batch(xs in prop::collection::vec(-50.0f64..50.0, 1..60), split in 0usize..60) {
        let split = split.min(xs.len());
        let whole = CountSummary::from_values(xs.iter().copied());
        let a = CountSummary::from_values(xs[..split].iter().copied());
        let b = CountSummary::from_values(xs[split..].iter().copied());
        let m = a.merge(&b);
        prop_assert_eq!(m.count, whole.count);
        prop_assert!((m.mean - whole.mean).abs() < 1e-9);
        for k in 2..=4 {
            let scale = whole.central_moment(k).abs().max(1.0);
            prop_assert!((m.central_moment(k) - whole.central_moment(k)).abs() < 1e-8 * scale);
        }
    }
}

#[test]
fn sampled_cumulants_follow_cluster_integrals() {
    let mut rng = common::rng(50);
    let k = common::random_kernel(6, &mut rng);
    let t = cumulant_comparison(&k, 4, 100_000, 100, 7, 1).unwrap();
    assert_eq!(t.rows.len(), 4);
    assert!(t.excursions == 0, "{:?}", t.rows);
}
