use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln |Gamma(x)|` (Lanczos, reflection below 1/2).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        let s = (pi * x).sin().abs();
        return pi.ln() - s.ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    let t = x + T::lit(LANCZOS_G) + half;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + T::lit(*c) / (x + T::from_usize_lossy(i));
    }
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + a.ln()
}

/// `Gamma(x)` for real `x` away from the poles.
pub fn gamma<T: Real>(x: T) -> T {
    if x <= T::zero() && x == x.floor() {
        return T::nan();
    }
    let magnitude = ln_gamma(x).exp();
    if x > T::zero() {
        return magnitude;
    }
    // sign of Gamma on (-k-1, -k) is (-1)^(k+1)
    let k = (-x).floor().to_i64().unwrap_or(0);
    if k % 2 == 0 {
        -magnitude
    } else {
        magnitude
    }
}

/// `ln n!`
pub fn ln_factorial<T: Real>(n: usize) -> T {
    if n < 2 {
        return T::zero();
    }
    if n < 32 {
        let mut acc = 0.0f64;
        for k in 2..=n {
            acc += (k as f64).ln();
        }
        return T::lit(acc);
    }
    ln_gamma(T::from_usize_lossy(n) + T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_matches_factorials_and_half_integers() {
        let mut fact = 1.0f64;
        for n in 1..25usize {
            assert_relative_eq!(gamma(n as f64), fact, max_relative = 1e-13);
            fact *= n as f64;
        }
        assert_relative_eq!(gamma(0.5f64), std::f64::consts::PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(-0.5f64), -2.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(-1.5f64), 4.0 / 3.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(ln_factorial::<f64>(100), 363.739_375_555_563_47, max_relative = 1e-14);
    }
}
