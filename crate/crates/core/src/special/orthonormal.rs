use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::gamma::ln_gamma;

/// Default cap on the degree of orthonormal functions.
pub const DEFAULT_MAX_DEGREE: usize = 1024;

/// Classical orthonormal function systems (weight included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrthonormalFamily<T> {
    /// Weber–Hermite functions on the line, weight `e^{-x^2}`.
    Hermite,
    /// Laguerre functions on `[0, inf)`, weight `x^alpha e^{-x}`.
    Laguerre { alpha: T },
    /// Meixner functions on `{0, 1, ...}`, weight `binom(x+K-1, x) q^x`.
    Meixner { q: T, k: u32 },
}

impl<T: Real> OrthonormalFamily<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OrthonormalFamily::Hermite => Ok(()),
            OrthonormalFamily::Laguerre { alpha } => {
                if alpha > -T::one() && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Constraint(format!("Laguerre alpha = {alpha} must exceed -1")))
                }
            }
            OrthonormalFamily::Meixner { q, k } => {
                if !(q > T::zero() && q < T::one()) {
                    Err(Error::Constraint(format!("Meixner q = {q} must lie in (0, 1)")))
                } else if k < 1 {
                    Err(Error::Constraint("Meixner K must be at least 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn check_support(&self, x: T) -> Result<()> {
        let ok = match self {
            OrthonormalFamily::Hermite => x.is_finite(),
            OrthonormalFamily::Laguerre { .. } => x >= T::zero() && x.is_finite(),
            OrthonormalFamily::Meixner { .. } => x >= T::zero() && x == x.floor() && x.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutsideSupport { what: "orthonormal-function argument", value: x.as_f64() })
        }
    }
}

/// `phi_ell(x)` with the default degree cap.
pub fn eval_orthonormal<T: Real>(family: OrthonormalFamily<T>, ell: usize, x: T) -> Result<T> {
    Ok(eval_orthonormal_all(family, ell + 1, x)?[ell])
}

/// `[phi_0(x), ..., phi_{n-1}(x)]` with the default degree cap.
pub fn eval_orthonormal_all<T: Real>(family: OrthonormalFamily<T>, n: usize, x: T) -> Result<Vec<T>> {
    eval_orthonormal_capped(family, n, x, DEFAULT_MAX_DEGREE)
}

/// `[phi_0(x), ..., phi_{n-1}(x)]`, rejecting degrees above `max_degree`.
pub fn eval_orthonormal_capped<T: Real>(family: OrthonormalFamily<T>, n: usize, x: T, max_degree: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if n - 1 > max_degree {
        return Err(Error::DegreeTooLarge { degree: n - 1, max: max_degree });
    }
    family.validate()?;
    family.check_support(x)?;
    Ok(match family {
        OrthonormalFamily::Hermite => hermite(n, x),
        OrthonormalFamily::Laguerre { alpha } => laguerre(n, alpha, x),
        OrthonormalFamily::Meixner { q, k } => meixner(n, q, T::from_u32(k).expect("K representable"), x),
    })
}

// Three-term recurrence p_{k+1} = a_k p_k - b_k p_{k-1} on an unweighted,
// unnormalised p, with the weight carried separately as a logarithm so that
// neither factor overflows. Output is sign(p) * exp(log_weight + ln|p|).
fn scaled_recurrence<T: Real>(n: usize, log_weight: T, mut coeffs: impl FnMut(usize, T, T) -> T) -> Vec<T> {
    let big = T::max_value().sqrt().sqrt();
    let mut out = Vec::with_capacity(n);
    let mut log_scale = log_weight;
    let mut prev = T::zero();
    let mut cur = T::one();
    let emit = |p: T, log_scale: T| -> T {
        if p == T::zero() {
            T::zero()
        } else {
            p.signum() * (log_scale + p.abs().ln()).exp()
        }
    };
    out.push(emit(cur, log_scale));
    for k in 0..n.saturating_sub(1) {
        let next = coeffs(k, cur, prev);
        prev = cur;
        cur = next;
        if cur.abs() > big {
            cur = cur / big;
            prev = prev / big;
            log_scale = log_scale + big.ln();
        }
        out.push(emit(cur, log_scale));
    }
    out
}

fn hermite<T: Real>(n: usize, x: T) -> Vec<T> {
    // phi_0 = pi^{-1/4} e^{-x^2/2};
    // phi_{k+1} = sqrt(2/(k+1)) x phi_k - sqrt(k/(k+1)) phi_{k-1}
    let log_w = -T::PI().ln() * T::lit(0.25) - x * x * T::lit(0.5);
    let two = T::lit(2.0);
    scaled_recurrence(n, log_w, |k, cur, prev| {
        let kf = T::from_usize_lossy(k);
        (two / (kf + T::one())).sqrt() * x * cur - (kf / (kf + T::one())).sqrt() * prev
    })
}

fn laguerre<T: Real>(n: usize, alpha: T, x: T) -> Vec<T> {
    // psi_0 = Gamma(alpha+1)^{-1/2};
    // psi_{k+1} sqrt((k+1)(k+1+alpha)) = (2k+1+alpha-x) psi_k - sqrt(k(k+alpha)) psi_{k-1}
    let half = T::lit(0.5);
    let log_x = if x == T::zero() {
        if alpha == T::zero() {
            T::zero()
        } else if alpha > T::zero() {
            T::neg_infinity()
        } else {
            T::infinity()
        }
    } else {
        alpha * half * x.ln()
    };
    let log_w = -half * ln_gamma(alpha + T::one()) - half * x + log_x;
    let two = T::lit(2.0);
    scaled_recurrence(n, log_w, |k, cur, prev| {
        let kf = T::from_usize_lossy(k);
        ((two * kf + T::one() + alpha - x) * cur - (kf * (kf + alpha)).sqrt() * prev)
            / ((kf + T::one()) * (kf + T::one() + alpha)).sqrt()
    })
}

fn meixner<T: Real>(n: usize, q: T, beta: T, x: T) -> Vec<T> {
    // orthonormal m_n with h_n = q^{-n} n! / ((beta)_n (1-q)^beta):
    // psi_0 = (1-q)^{beta/2};
    // psi_{k+1} = ((q-1)x + k + (k+beta)q) psi_k / sqrt(q(k+beta)(k+1))
    //           - sqrt(k(k-1+beta) / ((k+1)(k+beta))) psi_{k-1}
    let half = T::lit(0.5);
    let log_binom = ln_gamma(x + beta) - ln_gamma(beta) - ln_gamma(x + T::one());
    let log_w = half * (log_binom + x * q.ln()) + half * beta * (T::one() - q).ln();
    scaled_recurrence(n, log_w, |k, cur, prev| {
        let kf = T::from_usize_lossy(k);
        let lead = ((q - T::one()) * x + kf + (kf + beta) * q) / (q * (kf + beta) * (kf + T::one())).sqrt();
        let back = if k == 0 {
            T::zero()
        } else {
            (kf * (kf - T::one() + beta) / ((kf + T::one()) * (kf + beta))).sqrt()
        };
        lead * cur - back * prev
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre_on;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_ground_state_at_origin() {
        let v = eval_orthonormal(OrthonormalFamily::Hermite, 0, 0.0f64).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::PI.powf(-0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.751_125_5, epsilon = 1e-7);
    }

    #[test]
    fn hermite_orthonormal_by_quadrature() {
        let (x, w) = gauss_legendre_on(-14.0f64, 14.0, 200);
        let vals: Vec<Vec<f64>> = x.iter().map(|&xi| eval_orthonormal_all(OrthonormalFamily::Hermite, 11, xi).unwrap()).collect();
        for i in 0..=10 {
            for j in 0..=10 {
                let ip: f64 = vals.iter().zip(&w).map(|(v, wi)| wi * v[i] * v[j]).sum();
                assert_abs_diff_eq!(ip, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn hermite_stays_finite_at_high_degree() {
        for &x in &[-40.0f64, -20.0, 0.0, 3.3, 19.9, 40.0] {
            let v = eval_orthonormal_all(OrthonormalFamily::Hermite, 201, x).unwrap();
            assert!(v.iter().all(|p| p.is_finite() && p.abs() < 1.0));
        }
        // well past the turning point the functions are vanishingly small
        let v = eval_orthonormal_all(OrthonormalFamily::Hermite, 201, 40.0f64).unwrap();
        assert!(v[200].abs() < 1e-30 && v[200] > 0.0);
    }

    #[test]
    fn laguerre_orthonormal_by_quadrature() {
        for alpha in [0.0f64, 0.5, 2.0, -0.5] {
            let fam = OrthonormalFamily::Laguerre { alpha };
            // substitution x = s^2 removes the x^{alpha} endpoint behaviour
            let (s, w) = gauss_legendre_on(0.0f64, 9.0, 240);
            let vals: Vec<Vec<f64>> = s.iter().map(|&si| eval_orthonormal_all(fam, 11, si * si).unwrap()).collect();
            for i in 0..=10 {
                for j in 0..=10 {
                    let ip: f64 = vals.iter().zip(s.iter().zip(&w)).map(|(v, (si, wi))| wi * 2.0 * si * v[i] * v[j]).sum();
                    assert_abs_diff_eq!(ip, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn support_and_degree_errors() {
        assert!(eval_orthonormal(OrthonormalFamily::Laguerre { alpha: 0.0 }, 1, -1.0f64).is_err());
        assert!(eval_orthonormal(OrthonormalFamily::Meixner { q: 0.5, k: 1 }, 1, 0.5f64).is_err());
        assert!(matches!(
            eval_orthonormal_capped(OrthonormalFamily::<f64>::Hermite, 11, 0.0, 5),
            Err(Error::DegreeTooLarge { .. })
        ));
        assert!(eval_orthonormal(OrthonormalFamily::Meixner { q: 1.5, k: 1 }, 1, 1.0f64).is_err());
    }

    #[test]
    fn f32_hermite_is_consistent() {
        let a = eval_orthonormal_all(OrthonormalFamily::Hermite, 30, 1.3f32).unwrap();
        let b = eval_orthonormal_all(OrthonormalFamily::Hermite, 30, 1.3f64).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((*x as f64 - y).abs() < 1e-4);
        }
    }
}
