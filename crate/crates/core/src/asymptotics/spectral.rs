use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{dirichlet, eval_kernel, bounded_variance_eigenvalue, KernelSpec};
use crate::point::Point;
use crate::quadrature::{gauss_legendre, QuadratureScheme, Window};

/// Tabulated spectral density of the centred linear statistics of a
/// translation-invariant kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasureTable {
    pub lambda: Vec<f64>,
    /// `K(0) - (1/2 pi) int Khat(y) Khat(y - lambda) dy`
    pub density: Vec<f64>,
    pub k0: f64,
    /// `Khat(lambda) = int K(x) e^{-i lambda x} dx`
    pub kernel_hat: Vec<f64>,
}

fn require_translation_invariant(spec: &KernelSpec<f64>) -> Result<()> {
    spec.validate()?;
    if !spec.is_translation_invariant() {
        return Err(Error::Unsupported(format!("{} is not translation invariant", spec.name())));
    }
    Ok(())
}

/// Fourier transform of the kernel profile.
pub fn kernel_transform(spec: &KernelSpec<f64>, lambda: f64) -> Result<f64> {
    require_translation_invariant(spec)?;
    Ok(match *spec {
        KernelSpec::Sine => {
            let a = lambda.abs();
            if a < std::f64::consts::PI {
                1.0
            } else if a == std::f64::consts::PI {
                0.5
            } else {
                0.0
            }
        }
        KernelSpec::Macchi { rho, alpha, twist } => {
            let d = alpha * (lambda - twist);
            2.0 * rho * alpha / (1.0 + d * d)
        }
        _ => unreachable!(),
    })
}

/// `dmu/dlambda` at `lambda`.
pub fn spectral_density(spec: &KernelSpec<f64>, lambda: f64) -> Result<f64> {
    require_translation_invariant(spec)?;
    Ok(match *spec {
        KernelSpec::Sine => {
            // the transform is the indicator of [-pi, pi]; its self-overlap has length (2 pi - |lambda|)_+
            let overlap = (std::f64::consts::TAU - lambda.abs()).max(0.0);
            1.0 - overlap / std::f64::consts::TAU
        }
        KernelSpec::Macchi { rho, alpha, .. } => {
            // Lorentzians of width 1/alpha convolve into one of width 2/alpha
            let d = alpha * lambda / 2.0;
            rho - rho * rho * alpha / (1.0 + d * d)
        }
        _ => unreachable!(),
    })
}

/// Spectral density on `points` equally spaced values in `[-lambda_max, lambda_max]`.
pub fn spectral_measure(spec: &KernelSpec<f64>, lambda_max: f64, points: usize) -> Result<SpectralMeasureTable> {
    require_translation_invariant(spec)?;
    if !(lambda_max > 0.0) || points < 2 {
        return Err(Error::Constraint("spectral grid needs lambda_max > 0 and at least 2 points".into()));
    }
    let lambda: Vec<f64> =
        (0..points).map(|i| -lambda_max + 2.0 * lambda_max * i as f64 / (points - 1) as f64).collect();
    let density = lambda.iter().map(|&l| spectral_density(spec, l)).collect::<Result<_>>()?;
    let kernel_hat = lambda.iter().map(|&l| kernel_transform(spec, l)).collect::<Result<_>>()?;
    let k0 = spec.profile(0.0).expect("translation invariant").re;
    Ok(SpectralMeasureTable { lambda, density, k0, kernel_hat })
}

/// Mean and variance of the count in a window, by two independent routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub half_width: f64,
    pub mean: f64,
    /// `Tr K_B - ||K_B||_F^2` of the converged Nyström matrix (equal to
    /// `sum lambda (1 - lambda)` over its spectrum)
    pub variance: f64,
    /// `2L K(0) - int_{-2L}^{2L} (2L - |t|) |K(t)|^2 dt`
    pub double_integral: f64,
    pub nodes: usize,
    pub order: usize,
}

/// Target change between successive rungs of the Nyström ladder.
pub const VARIANCE_TOL: f64 = 1e-9;
/// Same for kernels with a kink on the diagonal, where rungs halve the panel
/// width and the error shrinks fourfold per rung.
pub const KINKED_VARIANCE_TOL: f64 = 2e-8;

/// `int_a^b f` split at the given breakpoints, panels of width at most `panel`.
pub(crate) fn piecewise_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], panel: f64, order: usize) -> f64 {
    let mut cuts: Vec<f64> = std::iter::once(a).chain(breaks.iter().copied().filter(|&c| c > a && c < b)).chain([b]).collect();
    cuts.sort_by(f64::total_cmp);
    let (x, w) = gauss_legendre::<f64>(order);
    let mut acc = 0.0;
    for seg in cuts.windows(2) {
        let len = seg[1] - seg[0];
        if len <= 0.0 {
            continue;
        }
        let panels = (len / panel).ceil().max(1.0) as usize;
        let h = len / panels as f64;
        for p in 0..panels {
            let mid = seg[0] + h * (p as f64 + 0.5);
            for (xi, wi) in x.iter().zip(&w) {
                acc += wi * 0.5 * h * f(mid + 0.5 * h * xi);
            }
        }
    }
    acc
}

fn profile_sq(spec: &KernelSpec<f64>) -> impl Fn(f64) -> f64 + '_ {
    move |t| spec.profile(t).expect("translation invariant").norm_sqr()
}

/// Scale on which the kernel profile varies.
fn kernel_scale(spec: &KernelSpec<f64>) -> f64 {
    match *spec {
        KernelSpec::Macchi { rho, alpha, twist } => {
            let s = alpha.min(1.0 / rho);
            if twist != 0.0 {
                s.min(1.0 / twist.abs())
            } else {
                s
            }
        }
        _ => 1.0,
    }
}

/// `Tr K_B - ||K_B||_F^2` for a difference kernel on a composite scheme with
/// equal panels: entries only depend on the panel offset, so each offset is
/// summed once.
pub(crate) fn toeplitz_panel_variance(
    k0: f64,
    abs_sq: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    panel: f64,
    order: usize,
) -> (f64, usize) {
    let panels = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let (x, w) = gauss_legendre::<f64>(order);
    let xs: Vec<f64> = x.iter().map(|t| 0.5 * h * t).collect();
    let ws: Vec<f64> = w.iter().map(|v| 0.5 * h * v).collect();
    let mut frob = 0.0;
    for off in 0..panels {
        let shift = off as f64 * h;
        let mut acc = 0.0;
        for (xi, wi) in xs.iter().zip(&ws) {
            for (xj, wj) in xs.iter().zip(&ws) {
                acc += wi * wj * abs_sq(shift + xi - xj);
            }
        }
        let mult = if off == 0 { panels as f64 } else { 2.0 * (panels - off) as f64 };
        frob += mult * acc;
    }
    (k0 * (b - a) - frob, panels * order)
}

/// Variance of `#[-L, L]` for a translation-invariant kernel.
pub fn count_variance(spec: &KernelSpec<f64>, l: f64) -> Result<VarianceEstimate> {
    require_translation_invariant(spec)?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Constraint(format!("half-width L = {l} must be positive")));
    }
    let k0 = spec.profile(0.0).expect("translation invariant").re;
    let scale = kernel_scale(spec);
    let sq = profile_sq(spec);
    // Smooth profiles converge spectrally in the order. A derivative jump on
    // the diagonal caps every fixed rule at second order, so there the panel
    // width is halved at fixed order instead.
    let kinked = matches!(spec, KernelSpec::Macchi { .. });
    let ladder: Vec<(f64, usize)> = if kinked {
        (1..=14).map(|k| (scale / 2f64.powi(k), 8)).collect()
    } else {
        [8usize, 12, 16, 24, 32, 48, 64].iter().map(|&q| (0.5 * scale, q)).collect()
    };
    let tol = if kinked { KINKED_VARIANCE_TOL } else { VARIANCE_TOL };
    let mut prev: Option<f64> = None;
    let mut last = (0.0, 0, 0);
    let mut converged = false;
    for (panel, order) in ladder {
        let (v, nodes) = toeplitz_panel_variance(k0, &sq, -l, l, panel, order);
        last = (v, nodes, order);
        if let Some(p) = prev {
            if (v - p).abs() <= tol * v.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        prev = Some(v);
    }
    let (variance, nodes, order) = last;
    if !converged {
        return Err(Error::NonConvergence(format!("Nyström variance ladder stalled at {variance} (previous {prev:?})")));
    }
    let two_l = 2.0 * l;
    let tail = piecewise_integral(|t| (two_l - t) * sq(t), 0.0, two_l, &[], 0.5 * scale, 24);
    Ok(VarianceEstimate { half_width: l, mean: k0 * two_l, variance, double_integral: k0 * two_l - 2.0 * tail, nodes, order })
}

/// `Tr K_B - ||K_B||_F^2` of the Nyström matrix on a composite scheme, for
/// any kernel with a pointwise evaluator (the matrix is not stored).
pub fn nystrom_count_moments(spec: &KernelSpec<f64>, window: &Window<f64>, panel: f64, order: usize) -> Result<(f64, f64)> {
    let scheme = QuadratureScheme::composite(window, Some(panel), order)?;
    let n = scheme.len();
    let mut trace = 0.0;
    let mut frob = 0.0;
    for i in 0..n {
        let pi = scheme.nodes[i];
        let kii = eval_kernel(spec, &pi, &pi)?.re;
        trace += scheme.weights[i] * kii;
        frob += scheme.weights[i] * scheme.weights[i] * kii * kii;
        for j in i + 1..n {
            let kij = eval_kernel(spec, &pi, &scheme.nodes[j])?.norm_sqr();
            frob += 2.0 * scheme.weights[i] * scheme.weights[j] * kij;
        }
    }
    Ok((trace, trace - frob))
}

/// Mean and variance of the count on the arc `[a, b]` for `CUE(n)`.
pub fn cue_arc_moments(n: usize, a: f64, b: f64) -> (f64, f64) {
    let k0 = n as f64 / std::f64::consts::TAU;
    let sq = |d: f64| {
        let k = dirichlet(n, d) / std::f64::consts::TAU;
        k * k
    };
    let panel = (std::f64::consts::TAU / n as f64).min(b - a);
    let (v, _) = toeplitz_panel_variance(k0, sq, a, b, panel, 16);
    (k0 * (b - a), v)
}

/// `Cov(#[0, w], #[t, t + w])` for each separation `t`.
pub fn covariance_decay(spec: &KernelSpec<f64>, window: f64, separations: &[f64]) -> Result<Vec<f64>> {
    require_translation_invariant(spec)?;
    if !(window > 0.0) {
        return Err(Error::Constraint(format!("window size {window} must be positive")));
    }
    let k0 = spec.profile(0.0).expect("translation invariant").re;
    let sq = profile_sq(spec);
    let panel = 0.25 * kernel_scale(spec);
    Ok(separations
        .iter()
        .map(|&t| {
            let t = t.abs();
            let overlap = (window - t).max(0.0);
            // int_0^w int_t^{t+w} g(y - x) dy dx = int g(s) (w - |s - t|)_+ ds
            let cross = piecewise_integral(|s| (window - (s - t).abs()) * sq(s), t - window, t + window, &[0.0, t], panel, 24);
            k0 * overlap - cross
        })
        .collect())
}

/// Mean and variance of `#[-n, n]` for the bounded-variance kernel; the
/// count is a sum of independent cell indicators.
pub fn bounded_variance_moments(n: usize) -> (f64, f64) {
    let n = n as i64;
    (-n..n).fold((0.0, 0.0), |(m, v), k| {
        let mu = bounded_variance_eigenvalue(k as f64);
        (m + mu, v + mu * (1.0 - mu))
    })
}

/// `sum_{k in Z} (1 - 1/(k^2+1)) / (k^2+1) = (pi/2) coth(pi) - (pi^2/2) csch^2(pi)`.
pub fn bounded_variance_limit() -> f64 {
    let pi = std::f64::consts::PI;
    let coth = 1.0 / pi.tanh();
    let csch = 1.0 / pi.sinh();
    0.5 * pi * coth - 0.5 * pi * pi * csch * csch
}

/// Largest deviation of the bulk-rescaled Hermite kernel
/// `c K_n(c x, c y)`, `c = pi / sqrt(2n)`, from the sine kernel on a
/// `grid x grid` lattice in `[-half_width, half_width]^2`.
pub fn hermite_sine_scaling_error(n: usize, half_width: f64, grid: usize) -> Result<f64> {
    let spec = KernelSpec::HermiteN { n };
    let c = std::f64::consts::PI / (2.0 * n as f64).sqrt();
    let pts: Vec<f64> = (0..grid).map(|i| -half_width + 2.0 * half_width * i as f64 / (grid - 1).max(1) as f64).collect();
    let mut worst = 0.0f64;
    for &x in &pts {
        for &y in &pts {
            let k = c * eval_kernel(&spec, &Point::Line(c * x), &Point::Line(c * y))?.re;
            let s = KernelSpec::<f64>::Sine.profile(x - y).expect("sine").re;
            worst = worst.max((k - s).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sine_density_is_piecewise_linear() {
        let t = spectral_measure(&KernelSpec::Sine, 10.0, 201).unwrap();
        for (l, d) in t.lambda.iter().zip(&t.density) {
            assert_abs_diff_eq!(*d, (l.abs() / std::f64::consts::TAU).min(1.0), epsilon = 1e-15);
        }
        assert_eq!(spectral_density(&KernelSpec::Sine, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn macchi_density_at_zero() {
        assert_abs_diff_eq!(spectral_density(&KernelSpec::macchi(0.4, 1.0), 0.0).unwrap(), 0.24, epsilon = 1e-15);
        assert!(spectral_measure(&KernelSpec::HermiteN { n: 3 }, 1.0, 3).is_err());
    }

    #[test]
    fn bounded_variance_limit_matches_partial_sums() {
        let direct: f64 = (-200_000i64..=200_000).map(|k| {
            let d = (k * k) as f64 + 1.0;
            (1.0 - 1.0 / d) / d
        }).sum();
        assert_abs_diff_eq!(bounded_variance_limit(), direct, epsilon = 2e-5);
    }

    #[test]
    fn sine_variance_routes_agree() {
        let v = count_variance(&KernelSpec::Sine, 5.0).unwrap();
        assert_abs_diff_eq!(v.variance, v.double_integral, epsilon = 1e-8);
    }
}
