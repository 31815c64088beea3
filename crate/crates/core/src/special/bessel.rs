use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::gamma::{ln_factorial, ln_gamma};

/// Largest integer order accepted by [`bessel_j`].
pub const MAX_BESSEL_ORDER: usize = 4096;

fn miller_start<T: Real>(top: usize, x: T) -> usize {
    let reach = (top as f64).max(x.as_f64().ceil());
    let n = reach + 24.0 + (64.0 * reach).sqrt();
    let n = n as usize + 2;
    n + (n % 2)
}

fn rescale_threshold<T: Real>() -> T {
    T::max_value().sqrt().sqrt()
}

/// `J_m(x)` for integer `m >= 0`, `x >= 0`.
pub fn bessel_j<T: Real>(order: usize, x: T) -> Result<T> {
    if order > MAX_BESSEL_ORDER {
        return Err(Error::DegreeTooLarge { degree: order, max: MAX_BESSEL_ORDER });
    }
    if x < T::zero() || !x.is_finite() {
        return Err(Error::OutsideSupport { what: "Bessel argument", value: x.as_f64() });
    }
    Ok(bessel_j_sequence(order, x)[order])
}

/// `[J_0(x), ..., J_max(x)]` by Miller's downward recurrence normalised with
/// `J_0 + 2 sum J_2k = 1`.
pub fn bessel_j_sequence<T: Real>(max_order: usize, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); max_order + 1];
    if x == T::zero() {
        out[0] = T::one();
        return out;
    }
    let start = miller_start(max_order, x);
    let two = T::lit(2.0);
    let big = rescale_threshold::<T>();
    let mut j_next = T::zero();
    let mut j = T::min_positive_value().sqrt();
    let mut norm = T::zero();
    for k in (1..=start).rev() {
        // j holds J_k (unnormalised); produce J_{k-1}
        if k <= max_order {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm = norm + two * j;
        }
        let j_prev = two * T::from_usize_lossy(k) / x * j - j_next;
        j_next = j;
        j = j_prev;
        if j.abs() > big {
            j = j / big;
            j_next = j_next / big;
            norm = norm / big;
            for v in out.iter_mut() {
                *v = *v / big;
            }
        }
    }
    out[0] = j;
    norm = norm + j;
    for v in out.iter_mut() {
        *v = *v / norm;
    }
    out
}

/// `(J_nu(x), J_{nu+1}(x))` for real `nu > -1`, `x >= 0`.
///
/// Downward recurrence normalised by the Neumann series
/// `(x/2)^nu = sum_k (nu + 2k) Gamma(nu + k) / k! J_{nu+2k}(x)`.
pub fn bessel_j_real<T: Real>(nu: T, x: T) -> Result<(T, T)> {
    if nu <= -T::one() || !nu.is_finite() {
        return Err(Error::Constraint(format!("Bessel order {nu} must exceed -1")));
    }
    if x < T::zero() || !x.is_finite() {
        return Err(Error::OutsideSupport { what: "Bessel argument", value: x.as_f64() });
    }
    if x == T::zero() {
        let j0 = if nu == T::zero() {
            T::one()
        } else if nu > T::zero() {
            T::zero()
        } else {
            T::infinity()
        };
        return Ok((j0, T::zero()));
    }
    if nu == nu.floor() {
        let m = nu.to_usize().unwrap_or(0);
        let seq = bessel_j_sequence(m + 1, x);
        return Ok((seq[m], seq[m + 1]));
    }
    let start = miller_start(1, x);
    let two = T::lit(2.0);
    let big = rescale_threshold::<T>();
    let coeff = |k: usize| -> T {
        if k == 0 {
            ln_gamma(nu + T::one()).exp()
        } else {
            let kk = T::from_usize_lossy(k);
            (nu + two * kk) * (ln_gamma(nu + kk) - ln_factorial::<T>(k)).exp()
        }
    };
    let mut j_next = T::zero();
    let mut j = T::min_positive_value().sqrt();
    let mut norm = T::zero();
    let mut j1 = T::zero();
    for k in (1..=start).rev() {
        if k == 1 {
            j1 = j;
        }
        if k % 2 == 0 {
            norm = norm + coeff(k / 2) * j;
        }
        let j_prev = two * (nu + T::from_usize_lossy(k)) / x * j - j_next;
        j_next = j;
        j = j_prev;
        if j.abs() > big {
            j = j / big;
            j_next = j_next / big;
            norm = norm / big;
            j1 = j1 / big;
        }
    }
    norm = norm + coeff(0) * j;
    let scale = (x / two).powf(nu) / norm;
    Ok((j * scale, j1 * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // power series sum_k (-1)^k (x/2)^{2k+nu} / (k! Gamma(k+nu+1))
    fn series(nu: f64, x: f64, terms: usize) -> f64 {
        let mut acc = 0.0;
        for k in 0..terms {
            let kf = k as f64;
            let lt = (2.0 * kf + nu) * (x / 2.0).ln() - ln_factorial::<f64>(k) - ln_gamma(kf + nu + 1.0);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let g = crate::special::gamma::gamma(kf + nu + 1.0);
            acc += sign * lt.exp() * g.signum();
        }
        acc
    }

    #[test]
    fn trivial_and_series_values() {
        assert_eq!(bessel_j(0, 0.0f64).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0f64).unwrap(), 0.0);
        assert_abs_diff_eq!(bessel_j(1, 2.0f64).unwrap(), series(1.0, 2.0, 40), epsilon = 1e-12);
        assert_abs_diff_eq!(bessel_j(1, 2.0f64).unwrap(), 0.576_724_807_756_873_4, epsilon = 1e-12);
    }

    #[test]
    fn reference_values() {
        let cases = [
            (0usize, 30.0, -0.086_367_983_581_040_21),
            (5, 0.7, 4.288_240_705_888_548e-5),
            (40, 50.0, -0.138_176_281_201_161_43),
            (3, 12.5, 0.110_008_136_314_349_27),
        ];
        for (m, x, want) in cases {
            assert_abs_diff_eq!(bessel_j(m, x).unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalisation_and_recurrence() {
        for &x in &[0.5f64, 1.0, 7.3, 19.0, 33.3, 40.0, 50.0] {
            let seq = bessel_j_sequence(200, x);
            let s = seq[0] * seq[0] + 2.0 * seq[1..].iter().map(|v| v * v).sum::<f64>();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
            for m in 1..=20 {
                assert_abs_diff_eq!(seq[m - 1] + seq[m + 1], 2.0 * m as f64 / x * seq[m], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn real_order_matches_references() {
        let cases = [
            (0.5, 2.0, 0.513_016_136_561_827_8),
            (-0.5, 3.0, -0.456_048_820_794_633_2),
            (2.3, 7.1, -0.306_033_816_324_409_3),
            (-0.7, 0.2, 1.619_702_424_452_866_4),
        ];
        for (nu, x, want) in cases {
            let (j, _) = bessel_j_real(nu, x).unwrap();
            assert_abs_diff_eq!(j, want, epsilon = 1e-12);
        }
        let (j0, j1) = bessel_j_real(1.0, 2.0f64).unwrap();
        assert_abs_diff_eq!(j0, 0.576_724_807_756_873_4, epsilon = 1e-12);
        assert_abs_diff_eq!(j1, series(2.0, 2.0, 40), epsilon = 1e-12);
        let (a, b) = bessel_j_real(0.5, 2.0f64).unwrap();
        assert_abs_diff_eq!(b, series(1.5, 2.0, 40), epsilon = 1e-12);
        assert_abs_diff_eq!(a, series(0.5, 2.0, 40), epsilon = 1e-12);
    }
}
