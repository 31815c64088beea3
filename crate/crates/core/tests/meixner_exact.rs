//! Meixner kernel against Gram–Schmidt carried out in exact rational arithmetic.

use detfield::{eval_kernel, KernelSpec, Point};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn stirling2(k: usize, j: usize) -> BigRational {
    let mut s = vec![vec![BigInt::zero(); k + 1]; k + 1];
    s[0][0] = BigInt::one();
    for n in 1..=k {
        for m in 1..=n {
            s[n][m] = BigInt::from(m) * &s[n - 1][m] + &s[n - 1][m - 1];
        }
    }
    BigRational::from_integer(s[k][j].clone())
}

/// `sum_x binom(x+K-1, x) q^x x^k`, through factorial moments
/// `sum_x binom(x+K-1, x) q^x (x)_j = (K)^(j) q^j / (1-q)^(K+j)`.
fn moment(k: usize, q: &BigRational, big_k: u32) -> BigRational {
    let one_minus = BigRational::one() - q;
    (0..=k).fold(BigRational::zero(), |acc, j| {
        let rising = (0..j).fold(BigRational::one(), |a, i| a * BigRational::from_integer(BigInt::from(big_k as usize + i)));
        let fm = rising * num_traits::pow(q.clone(), j) / num_traits::pow(one_minus.clone(), big_k as usize + j);
        acc + stirling2(k, j) * fm
    })
}

/// Monic orthogonal polynomials (coefficients, ascending) and their squared norms.
fn monic_system(n: usize, q: &BigRational, big_k: u32) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let m: Vec<BigRational> = (0..2 * n).map(|k| moment(k, q, big_k)).collect();
    let inner = |a: &[BigRational], b: &[BigRational]| {
        let mut s = BigRational::zero();
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                s += x * y * &m[i + j];
            }
        }
        s
    };
    let mut polys: Vec<Vec<BigRational>> = Vec::new();
    let mut norms = Vec::new();
    for d in 0..n {
        let mut p = vec![BigRational::zero(); d + 1];
        p[d] = BigRational::one();
        let mono = p.clone();
        for (prev, h) in polys.iter().zip(&norms) {
            let c = inner(&mono, prev) / h;
            for (i, v) in prev.iter().enumerate() {
                p[i] -= &c * v;
            }
        }
        norms.push(inner(&p, &p));
        polys.push(p);
    }
    (polys, norms)
}

fn eval_poly(p: &[BigRational], x: usize) -> BigRational {
    let xr = BigRational::from_integer(BigInt::from(x));
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * &xr + c)
}

fn weight(x: usize, q: &BigRational, big_k: u32) -> f64 {
    let binom = (1..=x).fold(BigRational::one(), |a, i| {
        a * BigRational::new(BigInt::from(i + big_k as usize - 1), BigInt::from(i))
    });
    (binom * num_traits::pow(q.clone(), x)).to_f64().unwrap()
}

fn check(m: usize, n: usize, qn: i64, qd: i64) {
    let q = rat(qn, qd);
    let big_k = (m - n + 1) as u32;
    let (polys, norms) = monic_system(n, &q, big_k);
    let spec = KernelSpec::MeixnerMN { m, n, q: qn as f64 / qd as f64 };
    let mut worst = 0.0f64;
    for x in 0..24usize {
        for y in (x..24).step_by(3) {
            let s = polys
                .iter()
                .zip(&norms)
                .fold(BigRational::zero(), |acc, (p, h)| acc + eval_poly(p, x) * eval_poly(p, y) / h);
            let want = s.to_f64().unwrap() * (weight(x, &q, big_k) * weight(y, &q, big_k)).sqrt();
            let got = eval_kernel(&spec, &Point::Lattice(x as f64), &Point::Lattice(y as f64)).unwrap();
            assert!(got.im.abs() < 1e-15);
            worst = worst.max((got.re - want).abs());
        }
    }
    assert!(worst < 1e-12, "M={m} N={n} q={qn}/{qd}: worst {worst}");
}

#[test]
fn square_geometry() {
    check(5, 5, 1, 2);
}

#[test]
fn rectangular_geometry() {
    check(7, 4, 3, 10);
    check(3, 1, 2, 3);
}
