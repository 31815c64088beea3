mod common;

use detfield::asymptotics::{discrete_sampler_comparison, ks_critical, ks_one_sample, plancherel_comparison, plancherel_conditional};
use detfield::quadrature::integrate;
use detfield::samplers::*;
use detfield::{eval_kernel, KernelSpec, Point};
use rand::Rng;

#[test]
fn projection_samples_have_rank_many_points() {
    for spec in [
        KernelSpec::CueN { n: 10 },
        KernelSpec::SoEven { n: 4 },
        KernelSpec::SoOdd { n: 5 },
        KernelSpec::Sp { n: 3 },
        KernelSpec::HermiteN { n: 6 },
        KernelSpec::LaguerreN { n: 4, alpha: 0.5 },
        KernelSpec::MeixnerMN { m: 5, n: 3, q: 0.4 },
    ] {
        let s = ProjectionSampler::new(&spec).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..200 {
            let p = s.sample(&mut rng).unwrap();
            assert_eq!(p.len(), s.rank(), "{}", spec.name());
            assert!(p.is_strictly_increasing(), "{}", spec.name());
        }
    }
    let mut rng = common::rng(31);
    let proj = common::random_projector(7, 3, &mut rng);
    let s = DiscreteDppSampler::new(&proj).unwrap();
    for _ in 0..2000 {
        assert_eq!(s.sample(&mut rng).unwrap().len(), 3);
    }
}

#[test]
fn discrete_sampler_follows_oracle() {
    let mut rng = common::rng(32);
    let k = common::random_kernel(5, &mut rng);
    let table = discrete_sampler_comparison(&k, 20_000, 5, 2).unwrap();
    assert_eq!(table.rows.len(), 32);
    assert!(table.excursions <= 2, "{} excursions", table.excursions);
}

fn one_point_ks(spec: KernelSpec<f64>, lo: f64, hi: f64, replicas: usize) -> (f64, f64) {
    let n = spec.rank().unwrap();
    let s = ProjectionSampler::new(&spec).unwrap();
    let pts: Vec<f64> = run_replicas(9, replicas, 1, |_, rng| s.sample(rng).unwrap().points).into_iter().flatten().collect();
    let density = |x: f64| eval_kernel(&spec, &Point::Line(x), &Point::Line(x)).unwrap().re / n as f64;
    let cdf = |x: f64| if x <= lo { 0.0 } else { integrate(density, lo, x.min(hi), 24, 8) };
    // points of one sample repel, so the independent-sample bound is conservative
    (ks_one_sample(&pts, cdf), ks_critical(replicas, 0.001))
}

#[test]
fn hermite_one_point_function() {
    let (d, crit) = one_point_ks(KernelSpec::HermiteN { n: 5 }, -10.0, 10.0, 3000);
    assert!(d < crit, "{d} vs {crit}");
}

#[test]
fn laguerre_one_point_function() {
    let (d, crit) = one_point_ks(KernelSpec::LaguerreN { n: 4, alpha: 1.0 }, 0.0, 40.0, 3000);
    assert!(d < crit, "{d} vs {crit}");
}

#[test]
fn cue_angles_are_uniform() {
    let tau = std::f64::consts::TAU;
    let s = ProjectionSampler::new(&KernelSpec::CueN { n: 12 }).unwrap();
    let pts: Vec<f64> = run_replicas(4, 2000, 1, |_, rng| s.sample(rng).unwrap().points).into_iter().flatten().collect();
    let d = ks_one_sample(&pts, |x| (x / tau).clamp(0.0, 1.0));
    assert!(d < ks_critical(2000, 0.001), "{d}");
}

#[test]
fn replicas_do_not_depend_on_thread_count() {
    let spec = KernelSpec::HermiteN { n: 4 };
    let s = ProjectionSampler::new(&spec).unwrap();
    let a = run_replicas(77, 13, 1, |_, rng| s.sample(rng).unwrap());
    let b = run_replicas(77, 13, 4, |_, rng| s.sample(rng).unwrap());
    assert_eq!(a, b);
    let c = run_replicas(78, 13, 4, |_, rng| s.sample(rng).unwrap());
    assert_ne!(a, c);
}

#[test]
fn last_passage_cdf_for_a_column_of_two() {
    // G(2, 1) is a sum of two geometric weights
    let q: f64 = 0.35;
    let mut acc = 0.0;
    for t in 0..15u64 {
        acc += (t + 1) as f64 * (1.0 - q).powi(2) * q.powi(t as i32);
        assert!((last_passage_cdf(2, 1, q, t).unwrap() - acc).abs() < 1e-12);
        assert!((last_passage_cdf(1, 2, q, t).unwrap() - acc).abs() < 1e-12);
    }
}

#[test]
fn last_passage_sampler_tracks_cdf() {
    let reps = 20_000;
    let gs = run_replicas(5, reps, 1, |_, rng| sample_last_passage(3, 2, 0.5, rng).unwrap());
    for t in [2u64, 5, 8] {
        let p = last_passage_cdf(3, 2, 0.5, t).unwrap();
        let emp = gs.iter().filter(|&&g| g <= t).count() as f64 / reps as f64;
        assert!((emp - p).abs() < 4.0 * (p * (1.0 - p) / reps as f64).sqrt(), "t={t}: {emp} vs {p}");
    }
}

#[test]
fn rsk_and_frobenius_bookkeeping() {
    assert_eq!(rsk_shape(&[0, 1, 2, 3]), vec![4]);
    assert_eq!(rsk_shape(&[3, 2, 1, 0]), vec![1, 1, 1, 1]);
    assert_eq!(rsk_shape(&[1, 3, 0, 2]), vec![2, 2]);
    let mut rng = common::rng(33);
    for _ in 0..200 {
        let n = rng.random_range(0..40);
        let p = sample_plancherel_of_size(n, &mut rng);
        assert_eq!(p.shape.iter().sum::<usize>(), n);
        assert!(p.shape.windows(2).all(|w| w[0] >= w[1]));
        let pos: f64 = p.frobenius.iter().filter(|&&x| x > 0.0).sum();
        let neg: f64 = p.frobenius.iter().filter(|&&x| x < 0.0).sum();
        assert_eq!(p.frobenius.iter().filter(|&&x| x > 0.0).count(), p.frobenius.iter().filter(|&&x| x < 0.0).count());
        assert_eq!(pos - neg, n as f64);
    }
}

#[test]
fn frobenius_one_point_function_is_bessel_diagonal() {
    let t = plancherel_comparison(4.0, 6, 20_000, 8, 1).unwrap();
    assert_eq!(t.rows.len(), 14);
    assert_eq!(t.rows[0].label, "-6.5");
    // the coordinates are symmetric in law under conjugation of the diagram
    for i in 0..7 {
        assert!((t.rows[i].predicted - t.rows[13 - i].predicted).abs() < 1e-12);
    }
    assert!(t.excursions <= 1, "{:?}", t.rows);
}

#[test]
fn plancherel_conditional_dimensions() {
    let t = plancherel_conditional(4, 20_000, 6, 1).unwrap();
    assert_eq!(t.rows.len(), 5);
    let total: f64 = t.rows.iter().map(|r| r.predicted).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(t.excursions <= 1);
}

#[test]
fn poissonized_plancherel_rejects_large_theta() {
    let mut rng = common::rng(34);
    assert!(sample_plancherel_poissonized(0.0, &mut rng).is_err());
    assert!(sample_plancherel_poissonized(MAX_THETA * 2.0, &mut rng).is_err());
    let s = sample_plancherel_poissonized(4.0, &mut rng).unwrap();
    assert_eq!(s.shape.iter().sum::<usize>(), s.n);
}
