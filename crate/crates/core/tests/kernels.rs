mod common;

use detfield::asymptotics::hermite_sine_scaling_error;
use detfield::quadrature::integrate;
use detfield::{eval_kernel, KernelSpec, Point};
use proptest::prelude::*;
use rand::Rng;

fn k(spec: &KernelSpec<f64>, x: f64, y: f64) -> f64 {
    eval_kernel(spec, &Point::Line(x), &Point::Line(y)).unwrap().re
}

#[test]
fn hermite_reproduces_itself() {
    let spec = KernelSpec::HermiteN { n: 10 };
    let mut rng = common::rng(21);
    for _ in 0..20 {
        let x = rng.random_range(-4.0..4.0);
        let z = rng.random_range(-4.0..4.0);
        let conv = integrate(|y| k(&spec, x, y) * k(&spec, y, z), -12.0, 12.0, 32, 24);
        assert!((conv - k(&spec, x, z)).abs() < 1e-8, "x={x} z={z}");
    }
    let tr = integrate(|y| k(&spec, y, y), -12.0, 12.0, 32, 24);
    assert!((tr - 10.0).abs() < 1e-8);
}

#[test]
fn cue_reproduces_itself() {
    let spec = KernelSpec::CueN { n: 10 };
    let tau = std::f64::consts::TAU;
    let kc = |x: f64, y: f64| eval_kernel(&spec, &Point::Line(x), &Point::Line(y)).unwrap();
    let mut rng = common::rng(22);
    for _ in 0..20 {
        let x = rng.random_range(0.0..tau);
        let z = rng.random_range(0.0..tau);
        let re = integrate(|y| (kc(x, y) * kc(y, z)).re, 0.0, tau, 32, 4);
        let im = integrate(|y| (kc(x, y) * kc(y, z)).im, 0.0, tau, 32, 4);
        let want = kc(x, z);
        assert!((re - want.re).abs() < 1e-8 && (im - want.im).abs() < 1e-8);
    }
    let tr = integrate(|y| kc(y, y).re, 0.0, tau, 32, 4);
    assert!((tr - 10.0).abs() < 1e-8);
}

#[test]
fn hermite_bulk_limit_is_sine() {
    let err = hermite_sine_scaling_error(200, 1.0, 41).unwrap();
    assert!(err <= 0.01, "sup error {err}");
}

#[test]
fn compact_group_traces() {
    for spec in [KernelSpec::SoEven { n: 6 }, KernelSpec::SoOdd { n: 6 }, KernelSpec::Sp { n: 6 }] {
        let tr = integrate(|y| k(&spec, y, y), 0.0, std::f64::consts::PI, 32, 4);
        assert!((tr - 6.0).abs() < 1e-10, "{}: {tr}", spec.name());
    }
}

#[test]
fn weak_non_hermitian_vanishes_outside_bulk() {
    let spec = KernelSpec::WeakNonHermitian { alpha: 0.7, x_center: 2.5 };
    let z = |x: f64, y: f64| Point::Plane(num_complex::Complex64::new(x, y));
    let v = eval_kernel(&spec, &z(0.1, 0.2), &z(-0.3, 0.05)).unwrap();
    assert_eq!(v.norm(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_line_families_are_hermitian(x in -5.0f64..5.0, y in -5.0f64..5.0, which in 0usize..5) {
        let spec = match which {
            0 => KernelSpec::Sine,
            1 => KernelSpec::Airy,
            2 => KernelSpec::HermiteN { n: 7 },
            3 => KernelSpec::Macchi { rho: 0.3, alpha: 1.2, twist: 0.8 },
            _ => KernelSpec::Bessel { alpha: 1.5 },
        };
        let (x, y) = if which == 4 { (x.abs() + 0.01, y.abs() + 0.01) } else { (x, y) };
        let a = eval_kernel(&spec, &Point::Line(x), &Point::Line(y)).unwrap();
        let b = eval_kernel(&spec, &Point::Line(y), &Point::Line(x)).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn diagonal_is_continuous(x in -3.0f64..3.0) {
        let spec = KernelSpec::Sine;
        let d = k(&spec, x, x);
        let near = k(&spec, x, x + 1e-7);
        prop_assert!((d - 1.0).abs() < 1e-15);
        prop_assert!((d - near).abs() < 1e-10);
    }
}
