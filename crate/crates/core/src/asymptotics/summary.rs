use serde::Serialize;

/// Highest moment tracked by [`CountSummary`].
pub const SUMMARY_ORDER: usize = 8;

/// Streaming summary of a scalar statistic: count, mean and central power
/// sums up to order 8. Merging is exact algebra, so pooling replicas in any
/// grouping gives the same moments up to rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSummary {
    pub count: f64,
    pub mean: f64,
    /// `central[k] = sum (x - mean)^k`; `central[0] = count`, `central[1] = 0`
    pub central: [f64; SUMMARY_ORDER + 1],
}

impl Default for CountSummary {
    fn default() -> Self {
        Self::new()
    }
}

impl CountSummary {
    pub fn new() -> Self {
        Self { count: 0.0, mean: 0.0, central: [0.0; SUMMARY_ORDER + 1] }
    }

    pub fn singleton(x: f64) -> Self {
        let mut central = [0.0; SUMMARY_ORDER + 1];
        central[0] = 1.0;
        Self { count: 1.0, mean: x, central }
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Self::new();
        for v in values {
            s.push(v);
        }
        s
    }

    pub fn push(&mut self, x: f64) {
        *self = self.merge(&Self::singleton(x));
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0.0 {
            return other.clone();
        }
        if other.count == 0.0 {
            return self.clone();
        }
        let (na, nb) = (self.count, other.count);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let da = -nb * delta / n;
        let db = na * delta / n;
        let mut central = [0.0; SUMMARY_ORDER + 1];
        central[0] = n;
        for p in 2..=SUMMARY_ORDER {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for k in 0..=p {
                if k > 0 {
                    binom = binom * (p - k + 1) as f64 / k as f64;
                }
                acc += binom * (self.central[p - k] * da.powi(k as i32) + other.central[p - k] * db.powi(k as i32));
            }
            central[p] = acc;
        }
        Self { count: n, mean: self.mean - da, central }
    }

    /// Population central moment `E (X - mean)^k`.
    pub fn central_moment(&self, k: usize) -> f64 {
        self.central[k] / self.count
    }

    /// Sample variance with the `n - 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.count < 2.0 {
            return 0.0;
        }
        self.central[2] / (self.count - 1.0)
    }

    /// Cumulants `kappa_1..kappa_order` of the empirical distribution.
    pub fn cumulants(&self, order: usize) -> Vec<f64> {
        let order = order.min(SUMMARY_ORDER);
        let mu: Vec<f64> = (0..=order).map(|k| if k == 1 { 0.0 } else { self.central_moment(k) }).collect();
        // kappa_n = mu_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k mu_{n-k}, about the mean
        let mut kappa = vec![0.0; order + 1];
        for n in 2..=order {
            let mut acc = mu[n];
            let mut binom = 1.0;
            for k in 1..n {
                if k > 1 {
                    binom = binom * (n - k + 1) as f64 / (k - 1) as f64;
                }
                acc -= binom * kappa[k] * mu[n - k];
            }
            kappa[n] = acc;
        }
        if order >= 1 {
            kappa[1] = self.mean;
        }
        kappa[1..].to_vec()
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov distance between the empirical law of `sample` and `cdf`.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov distance of an integer-valued statistic to `N(mean, sd^2)`,
/// comparing the empirical CDF at each integer `k` with `Phi((k + 1/2 - mean)/sd)`.
pub fn ks_normal_lattice(values: &[i64], mean: f64, sd: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len() as f64;
    let (lo, hi) = (v[0] - 1, v[v.len() - 1]);
    let mut idx = 0usize;
    let mut d = 0.0f64;
    for k in lo..=hi {
        while idx < v.len() && v[idx] <= k {
            idx += 1;
        }
        let model = normal_cdf((k as f64 + 0.5 - mean) / sd);
        d = d.max((idx as f64 / n - model).abs());
    }
    d
}

/// Asymptotic one-sample Kolmogorov critical value at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Asymptotic two-sample critical value at level `alpha`.
pub fn ks_critical_two_sample(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

/// `|hits/trials - p| <= k sqrt(p (1 - p) / trials)`, returned with the band half-width.
pub fn binomial_band(hits: usize, trials: usize, p: f64, k: f64) -> (bool, f64) {
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    ((hits as f64 / trials as f64 - p).abs() <= k * sigma, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn merging_matches_direct_accumulation() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 + 0.25 * i as f64).collect();
        let all = CountSummary::from_values(xs.iter().copied());
        let left = CountSummary::from_values(xs[..13].iter().copied());
        let right = CountSummary::from_values(xs[13..].iter().copied());
        let pooled = right.merge(&left);
        assert_abs_diff_eq!(pooled.mean, all.mean, epsilon = 1e-12);
        for k in 2..=SUMMARY_ORDER {
            let direct: f64 = xs.iter().map(|x| (x - all.mean).powi(k as i32)).sum();
            assert!((pooled.central[k] - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn cumulants_of_a_two_point_law() {
        // fair coin on {0, 1}: kappa = 1/2, 1/4, 0, -1/8
        let s = CountSummary::from_values((0..1000).map(|i| (i % 2) as f64));
        let k = s.cumulants(4);
        assert_abs_diff_eq!(k[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(k[1], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(k[2], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k[3], -0.125, epsilon = 1e-14);
    }

    #[test]
    fn normal_cdf_values() {
        assert_abs_diff_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(normal_cdf(1.96), 0.9750021048517795, epsilon = 1e-15);
    }

    #[test]
    fn ks_statistics() {
        let u: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert_abs_diff_eq!(ks_one_sample(&u, |x| x.clamp(0.0, 1.0)), 0.005, epsilon = 1e-12);
        assert_eq!(ks_two_sample(&u, &u), 0.0);
        assert_abs_diff_eq!(ks_critical(10_000, 0.01), 0.016276, epsilon = 1e-5);
    }
}
