use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::point::Point;
use crate::scalar::{cplx, Cplx, Real};
use crate::special::{eval_orthonormal_all, OrthonormalFamily};

use super::KernelSpec;

/// Orthonormal frame `f_1(x), ..., f_n(x)` of a finite-rank projection,
/// normalised so that `K(x, y) = sum_k f_k(x) conj(f_k(y))`.
pub fn projection_frame<T: Real>(spec: &KernelSpec<T>, p: &Point<T>) -> Result<Vec<Cplx<T>>> {
    let real = |v: Vec<T>| v.into_iter().map(cplx).collect::<Vec<_>>();
    let x = p.coord();
    match *spec {
        KernelSpec::HermiteN { n } => Ok(real(eval_orthonormal_all(OrthonormalFamily::Hermite, n, x)?)),
        KernelSpec::LaguerreN { n, alpha } => Ok(real(eval_orthonormal_all(OrthonormalFamily::Laguerre { alpha }, n, x)?)),
        KernelSpec::MeixnerMN { m, n, q } => {
            let k = (m - n + 1) as u32;
            Ok(real(eval_orthonormal_all(OrthonormalFamily::Meixner { q, k }, n, x)?))
        }
        KernelSpec::CueN { n } => {
            // symmetric frequencies k - (n-1)/2 keep the kernel real
            let norm = T::TAU().sqrt();
            let shift = T::from_usize_lossy(n - 1) * T::lit(0.5);
            Ok((0..n)
                .map(|k| Complex::from_polar(T::one() / norm, (T::from_usize_lossy(k) - shift) * x))
                .collect())
        }
        KernelSpec::SoEven { n } => {
            let c0 = T::one() / T::PI().sqrt();
            let c = (T::lit(2.0) / T::PI()).sqrt();
            Ok((0..n)
                .map(|k| if k == 0 { cplx(c0) } else { cplx(c * (T::from_usize_lossy(k) * x).cos()) })
                .collect())
        }
        KernelSpec::SoOdd { n } => {
            let c = (T::lit(2.0) / T::PI()).sqrt();
            Ok((0..n).map(|k| cplx(c * ((T::from_usize_lossy(k) + T::lit(0.5)) * x).sin())).collect())
        }
        KernelSpec::Sp { n } => {
            let c = (T::lit(2.0) / T::PI()).sqrt();
            Ok((1..=n).map(|k| cplx(c * (T::from_usize_lossy(k) * x).sin())).collect())
        }
        KernelSpec::GinibreTau { tau, n: Some(n) } => {
            let z = match *p {
                Point::Plane(z) => z,
                _ => return Err(Error::OutsideSupport { what: "planar kernel argument", value: x.as_f64() }),
            };
            Ok(elliptic_ginibre_frame(tau, n, z))
        }
        _ => Err(Error::Unsupported(format!("{} is not a finite-rank projection family", spec.name()))),
    }
}

// w(z) psi_l(z) with psi_l = tau^{l/2} He_l(z / sqrt(tau)) / (sqrt(pi l!) (1 - tau^2)^{1/4})
// via p_{l+1} = (z p_l - sqrt(l) tau p_{l-1}) / sqrt(l + 1).
fn elliptic_ginibre_frame<T: Real>(tau: T, n: usize, z: Cplx<T>) -> Vec<Cplx<T>> {
    let s = T::one() - tau * tau;
    let log_w = -(z.norm_sqr() - tau * (z * z).re) / (T::lit(2.0) * s);
    let log_norm = -T::lit(0.5) * T::PI().ln() - T::lit(0.25) * s.ln();
    let big = T::max_value().sqrt().sqrt();
    let mut log_scale = log_w + log_norm;
    let mut out = Vec::with_capacity(n);
    let mut prev: Cplx<T> = Complex::new(T::zero(), T::zero());
    let mut cur: Cplx<T> = Complex::new(T::one(), T::zero());
    out.push(cur * log_scale.exp());
    for l in 0..n.saturating_sub(1) {
        let lf = T::from_usize_lossy(l);
        let next = (z * cur - prev * (lf.sqrt() * tau)) / (lf + T::one()).sqrt();
        prev = cur;
        cur = next;
        if cur.norm() > big {
            cur = cur / big;
            prev = prev / big;
            log_scale = log_scale + big.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}

/// Frames at every point, one row per point.
pub fn projection_frames<T: Real>(spec: &KernelSpec<T>, points: &[Point<T>]) -> Result<CMatrix<T>> {
    let rank = spec
        .rank()
        .ok_or_else(|| Error::Unsupported(format!("{} is not a finite-rank projection family", spec.name())))?;
    let mut out = CMatrix::zeros(points.len(), rank);
    for (i, p) in points.iter().enumerate() {
        let f = projection_frame(spec, p)?;
        for (j, v) in f.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre_on;
    use approx::assert_abs_diff_eq;

    #[test]
    fn elliptic_ginibre_frame_is_orthonormal() {
        for tau in [0.0f64, 0.3, 0.6] {
            let n = 6;
            let spec = KernelSpec::GinibreTau { tau, n: Some(n) };
            let (xs, wx) = gauss_legendre_on(-9.0, 9.0, 90);
            let mut gram = vec![Complex::new(0.0, 0.0); n * n];
            for (x, a) in xs.iter().zip(&wx) {
                for (y, b) in xs.iter().zip(&wx) {
                    let f = projection_frame(&spec, &Point::Plane(Complex::new(*x, *y))).unwrap();
                    for i in 0..n {
                        for j in 0..n {
                            gram[i * n + j] += f[i] * f[j].conj() * (a * b);
                        }
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!((gram[i * n + j] - want).norm(), 0.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn circle_frames_are_orthonormal() {
        let specs = [KernelSpec::CueN { n: 5 }, KernelSpec::SoEven { n: 5 }, KernelSpec::SoOdd { n: 5 }, KernelSpec::Sp { n: 5 }];
        for s in &specs {
            let len = s.circle_length().unwrap();
            let (xs, ws) = gauss_legendre_on(0.0, len, 64);
            let fr: Vec<_> = xs.iter().map(|&x| projection_frame(s, &Point::Line(x)).unwrap()).collect();
            for i in 0..5 {
                for j in 0..5 {
                    let ip = fr.iter().zip(&ws).fold(Complex::new(0.0, 0.0), |acc, (f, w)| acc + f[i] * f[j].conj() * *w);
                    assert_abs_diff_eq!((ip - if i == j { 1.0 } else { 0.0 }).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }
}
