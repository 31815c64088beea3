//! Renewal processes and their determinantal description: the Macchi
//! interval law, renewal densities read off a kernel, the i.i.d.-spacing
//! conditions, and the convolution equation `u = f + u * f` in both
//! directions.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernels::{eval_kernel, KernelSpec};
use crate::point::Point;

/// Tolerance on the total mass of an interval law.
pub const MASS_TOL: f64 = 1e-8;
/// The series `u = sum_k f^{*k}` is truncated once a term drops below this.
pub const SERIES_TOL: f64 = 1e-10;
const SERIES_CAP: usize = 100_000;

/// Samples of a function on the uniform grid `x_i = i * step`, `i = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    pub step: f64,
    pub values: Vec<f64>,
}

impl Tabulated {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || values.len() < 2 {
            return Err(Error::InvalidDensity(format!("grid step {step} with {} samples", values.len())));
        }
        Ok(Self { step, values })
    }

    pub fn from_fn(step: f64, x_max: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = (x_max / step).round() as usize;
        Self::new(step, (0..=n).map(|i| f(i as f64 * step)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// Four-point Lagrange interpolation; constant continuation past the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.len();
        if x <= 0.0 {
            return self.values[0];
        }
        if x >= self.x_max() {
            return self.values[n - 1];
        }
        let s = x / self.step;
        let i = (s.floor() as usize).min(n - 2);
        if n < 4 {
            let t = s - i as f64;
            return self.values[i] * (1.0 - t) + self.values[i + 1] * t;
        }
        let base = i.saturating_sub(1).min(n - 4);
        let t = s - base as f64;
        let v = &self.values[base..base + 4];
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        v[0] * l0 + v[1] * l1 + v[2] * l2 + v[3] * l3
    }

    /// Composite Simpson (with a 3/8 panel when the interval count is odd).
    pub fn integral(&self) -> f64 {
        simpson(&self.values, self.step)
    }

    /// `int x^k f(x) dx`
    pub fn moment(&self, k: i32) -> f64 {
        let v: Vec<f64> = self.values.iter().enumerate().map(|(i, f)| f * self.x(i).powi(k)).collect();
        simpson(&v, self.step)
    }

    pub fn sup_distance(&self, other: &Tabulated) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    match n {
        0 => 0.0,
        1 => 0.5 * h * (v[0] + v[1]),
        2 => h / 3.0 * (v[0] + 4.0 * v[1] + v[2]),
        _ => {
            let (even, tail) = if n.is_multiple_of(2) { (n, 0.0) } else { (n - 3, 3.0 * h / 8.0 * (v[n - 3] + 3.0 * v[n - 2] + 3.0 * v[n - 1] + v[n])) };
            let mut acc = v[0] + v[even];
            for (i, x) in v.iter().enumerate().take(even).skip(1) {
                acc += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
            }
            acc * h / 3.0 + tail
        }
    }
}

/// Law of the spacings: a tabulated density on `[0, x_max]` or a probability
/// vector on `{0, 1, 2, ...}`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntervalLaw {
    Density(Tabulated),
    Lattice(Vec<f64>),
}

impl IntervalLaw {
    pub fn total_mass(&self) -> f64 {
        match self {
            IntervalLaw::Density(t) => t.integral(),
            IntervalLaw::Lattice(p) => p.iter().sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            IntervalLaw::Density(t) => t.moment(1),
            IntervalLaw::Lattice(p) => p.iter().enumerate().map(|(k, v)| k as f64 * v).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = match self {
            IntervalLaw::Density(t) => &t.values,
            IntervalLaw::Lattice(p) => p,
        };
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < -MASS_TOL) {
            return Err(Error::InvalidDensity(format!("negative or non-finite value {v}")));
        }
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDensity(format!("total mass {mass} differs from 1")));
        }
        let mean = self.mean();
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::InvalidDensity(format!("mean spacing {mean} must be positive")));
        }
        Ok(())
    }

    /// Density (or probability vector) of the stationary delay
    /// `P(tau > x) / E tau`.
    pub fn stationary_delay(&self) -> IntervalLaw {
        let mean = self.mean();
        match self {
            IntervalLaw::Density(t) => {
                let n = t.len();
                let mut tail = vec![0.0; n];
                // survival by trapezoid from the right end
                for i in (0..n - 1).rev() {
                    tail[i] = tail[i + 1] + 0.5 * t.step * (t.values[i] + t.values[i + 1]);
                }
                IntervalLaw::Density(Tabulated { step: t.step, values: tail.iter().map(|s| s / mean).collect() })
            }
            IntervalLaw::Lattice(p) => {
                let mut tail = vec![0.0; p.len()];
                let mut acc = 0.0;
                for k in (0..p.len()).rev() {
                    tail[k] = acc;
                    acc += p[k];
                }
                IntervalLaw::Lattice(tail.iter().map(|s| s / mean).collect())
            }
        }
    }
}

/// How the first point is placed.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayMode {
    /// First point drawn from `P(tau > x) / E tau`.
    Stationary,
    /// First point at the origin.
    ZeroDelay,
    Custom(IntervalLaw),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenewalSpec {
    pub law: IntervalLaw,
    pub delay: DelayMode,
}

impl RenewalSpec {
    pub fn new(law: IntervalLaw, delay: DelayMode) -> Result<Self> {
        law.validate()?;
        if let DelayMode::Custom(d) = &delay {
            d.validate()?;
        }
        Ok(Self { law, delay })
    }

    /// Exponential spacings of rate `rho` (the Poisson process).
    pub fn exponential(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Constraint(format!("rate rho = {rho} must be positive")));
        }
        let t = Tabulated::from_fn(1.0 / (200.0 * rho), 40.0 / rho, |x| rho * (-rho * x).exp())?;
        Self::new(IntervalLaw::Density(t), DelayMode::Stationary)
    }

    pub fn mean(&self) -> f64 {
        self.law.mean()
    }

    pub fn intensity(&self) -> f64 {
        1.0 / self.mean()
    }

    pub fn density(&self) -> Option<&Tabulated> {
        match &self.law {
            IntervalLaw::Density(t) => Some(t),
            IntervalLaw::Lattice(_) => None,
        }
    }
}

/// `f(x) = 2 rho (1 - 2 rho alpha)^{-1/2} e^{-x/alpha} sinh(sqrt(1 - 2 rho alpha) x / alpha)`,
/// with the limit `2 rho (x/alpha) e^{-x/alpha}` at `2 rho alpha = 1`.
pub fn macchi_pdf(rho: f64, alpha: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let s = (1.0 - 2.0 * rho * alpha).max(0.0).sqrt();
    let y = x / alpha;
    if s * y < 1e-4 {
        // sinh(s y)/s as a series in s^2 y^2
        2.0 * rho * (-y).exp() * y * (1.0 + s * s * y * y / 6.0 + (s * y).powi(4) / 120.0)
    } else {
        rho / s * ((-(1.0 - s) * y).exp() - (-(1.0 + s) * y).exp())
    }
}

fn check_macchi(rho: f64, alpha: f64) -> Result<()> {
    if !(rho > 0.0 && alpha > 0.0 && rho.is_finite() && alpha.is_finite()) {
        return Err(Error::Constraint(format!("rho = {rho} and alpha = {alpha} must be positive")));
    }
    if 2.0 * rho * alpha > 1.0 + 1e-12 {
        return Err(Error::Constraint(format!("2 rho alpha = {} exceeds 1", 2.0 * rho * alpha)));
    }
    Ok(())
}

/// Interval law of the Macchi kernel `rho exp(-|x - y| / alpha)`, tabulated
/// with step `min(alpha, 1/rho)/200` on `[0, 30/rho]`.
pub fn macchi_interval_density(rho: f64, alpha: f64) -> Result<RenewalSpec> {
    check_macchi(rho, alpha)?;
    let h = alpha.min(1.0 / rho) / 200.0;
    let t = Tabulated::from_fn(h, 30.0 / rho, |x| macchi_pdf(rho, alpha, x))?;
    RenewalSpec::new(IntervalLaw::Density(t), DelayMode::Stationary)
}

/// `u(x2 - x1) = K(x2, x2) - K(x1, x2) K(x2, x1) / K(x1, x1)`.
pub fn renewal_density_from_kernel(spec: &KernelSpec<f64>, x1: f64, x2: f64) -> Result<f64> {
    if x2 < x1 {
        return Err(Error::Constraint(format!("x2 = {x2} must not precede x1 = {x1}")));
    }
    let (p, q) = (Point::Line(x1), Point::Line(x2));
    let k11 = eval_kernel(spec, &p, &p)?.re;
    if !(k11 > 0.0) {
        return Err(Error::Constraint(format!("K(x1, x1) = {k11} must be positive")));
    }
    if x1 == x2 {
        return Ok(0.0);
    }
    let k22 = eval_kernel(spec, &q, &q)?.re;
    let k12 = eval_kernel(spec, &p, &q)?;
    let k21 = eval_kernel(spec, &q, &p)?;
    Ok(k22 - (k12 * k21).re / k11)
}

/// Residuals of the two conditions characterising kernels with i.i.d. spacings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidSpacingReport {
    /// `max |K(x1,x2) K(x2,x3) - K(x1,x3) K(x2,x2)|`
    pub cond_a_max_violation: f64,
    /// `max |u(a, b) - u(0, b - a)|` over the pairs of every triple
    pub cond_b_max_violation: f64,
    pub passes: bool,
}

pub const IID_TOL: f64 = 1e-9;

pub fn check_iid_spacing_conditions(spec: &KernelSpec<f64>, triples: &[(f64, f64, f64)]) -> Result<IidSpacingReport> {
    let k = |a: f64, b: f64| eval_kernel(spec, &Point::Line(a), &Point::Line(b));
    let mut a_max = 0.0f64;
    let mut b_max = 0.0f64;
    for &(x1, x2, x3) in triples {
        if !(x1 <= x2 && x2 <= x3) {
            return Err(Error::Constraint(format!("triple ({x1}, {x2}, {x3}) is not ascending")));
        }
        let r = k(x1, x2)? * k(x2, x3)? - k(x1, x3)? * k(x2, x2)?;
        a_max = a_max.max(r.norm());
        for (p, q) in [(x1, x2), (x2, x3), (x1, x3)] {
            let here = renewal_density_from_kernel(spec, p, q)?;
            let origin = renewal_density_from_kernel(spec, 0.0, q - p)?;
            b_max = b_max.max((here - origin).abs());
        }
    }
    Ok(IidSpacingReport {
        cond_a_max_violation: a_max,
        cond_b_max_violation: b_max,
        passes: a_max < IID_TOL && b_max < IID_TOL,
    })
}

/// Linear convolution on a uniform grid by FFT.
struct Convolver {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    size: usize,
}

impl Convolver {
    fn new(n: usize) -> Self {
        let size = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(size), inv: planner.plan_fft_inverse(size), size }
    }

    fn spectrum(&self, a: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v, 0.0)).collect();
        buf.resize(self.size, Complex::new(0.0, 0.0));
        self.fwd.process(&mut buf);
        buf
    }

    /// `sum_{m=0}^{i} a_m b_{i-m}` for `i < n`.
    fn sums(&self, a_hat: &[Complex<f64>], b: &[f64]) -> Vec<f64> {
        let mut buf = self.spectrum(b);
        for (x, y) in buf.iter_mut().zip(a_hat) {
            *x *= y;
        }
        self.inv.process(&mut buf);
        buf[..self.n].iter().map(|c| c.re / self.size as f64).collect()
    }
}

/// `int_0^{x_i} a(y) b(x_i - y) dy` by the trapezoid rule with the
/// first Gregory end correction.
fn grid_convolution(conv: &Convolver, a: &[f64], a_hat: &[Complex<f64>], b: &[f64], h: f64) -> Vec<f64> {
    let s = conv.sums(a_hat, b);
    (0..a.len())
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let trap = s[i] - 0.5 * (a[0] * b[i] + a[i] * b[0]);
            let corr = if i >= 2 { ((a[i] * b[0] - a[i - 1] * b[1]) - (a[1] * b[i - 1] - a[0] * b[i])) / 12.0 } else { 0.0 };
            h * (trap - corr)
        })
        .collect()
}

/// Renewal density `u = f + f*f + f*f*f + ...`, summed until a term is below
/// [`SERIES_TOL`]. Continuous laws give `u` on the same grid as `f`; lattice
/// laws give `u(0..len)`.
pub fn renewal_density_series(spec: &RenewalSpec) -> Result<IntervalLaw> {
    match &spec.law {
        IntervalLaw::Density(f) => {
            let conv = Convolver::new(f.len());
            let f_hat = conv.spectrum(&f.values);
            let mut term = f.values.clone();
            let mut u = term.clone();
            for _ in 0..SERIES_CAP {
                term = grid_convolution(&conv, &f.values, &f_hat, &term, f.step);
                for (x, t) in u.iter_mut().zip(&term) {
                    *x += t;
                }
                let size = term.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                if !size.is_finite() {
                    break;
                }
                if size < SERIES_TOL {
                    return Ok(IntervalLaw::Density(Tabulated { step: f.step, values: u }));
                }
            }
            Err(Error::NonConvergence("renewal series did not settle".into()))
        }
        IntervalLaw::Lattice(p) => {
            // u(n) = f(n) + sum_{m=0}^{n} u(n-m) f(m)
            let n = p.len();
            let mut u = vec![0.0; n];
            let denom = 1.0 - p[0];
            if !(denom > 0.0) {
                return Err(Error::InvalidDensity("all mass at zero spacing".into()));
            }
            for i in 0..n {
                let mut acc = p[i];
                for m in 1..=i {
                    acc += u[i - m] * p[m];
                }
                u[i] = acc / denom;
            }
            Ok(IntervalLaw::Lattice(u))
        }
    }
}

/// Which form of the convolution equation to invert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionMode {
    Continuous,
    Discrete,
}

/// Recovers the interval law from a renewal density by forward substitution
/// in `u = f + u * f`. Continuous mode uses the trapezoid rule on the grid of
/// `u`; discrete mode treats `u.values` as `u(0), u(1), ...` (the step is
/// ignored). The result is neither renormalised nor checked for sign.
pub fn solve_convolution(u: &Tabulated, mode: ConvolutionMode) -> Result<RenewalSpec> {
    if let Some(v) = u.values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDensity(format!("renewal density value {v} is negative or not finite")));
    }
    let uv = &u.values;
    let n = uv.len();
    let mut f = vec![0.0; n];
    match mode {
        ConvolutionMode::Continuous => {
            let h = u.step;
            f[0] = uv[0];
            for i in 1..n {
                let mut acc = 0.5 * uv[i] * f[0];
                for m in 1..i {
                    acc += uv[i - m] * f[m];
                }
                f[i] = (uv[i] - h * acc) / (1.0 + 0.5 * h * uv[0]);
            }
        }
        ConvolutionMode::Discrete => {
            for i in 0..n {
                let mut acc = 0.0;
                for m in 0..i {
                    acc += uv[i - m] * f[m];
                }
                f[i] = (uv[i] - acc) / (1.0 + uv[0]);
            }
        }
    }
    // Small negative values are returned as they are (the law then fails
    // `IntervalLaw::validate`); only a blow-up counts as divergence.
    let scale = uv.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if let Some(v) = f.iter().find(|v| !v.is_finite() || v.abs() > 1e6 * scale) {
        return Err(Error::NonConvergence(format!(
            "forward substitution diverged ({v}); the input is not a renewal density"
        )));
    }
    let law = match mode {
        ConvolutionMode::Continuous => IntervalLaw::Density(Tabulated { step: u.step, values: f }),
        ConvolutionMode::Discrete => IntervalLaw::Lattice(f),
    };
    Ok(RenewalSpec { law, delay: DelayMode::Stationary })
}

/// `sup |u - f - u*f|` on the grid, with the same trapezoid convolution the
/// solver uses.
pub fn convolution_residual(u: &Tabulated, f: &Tabulated) -> f64 {
    let h = u.step;
    let n = u.len().min(f.len());
    (0..n)
        .map(|i| {
            let conv = if i == 0 {
                0.0
            } else {
                let mut acc = 0.5 * (u.values[i] * f.values[0] + u.values[0] * f.values[i]);
                for m in 1..i {
                    acc += u.values[i - m] * f.values[m];
                }
                h * acc
            };
            (u.values[i] - f.values[i] - conv).abs()
        })
        .fold(0.0, f64::max)
}

/// `rho_k(t_1, ..., t_k) = rho_1 u(t_2 - t_1) ... u(t_k - t_{k-1})` for a
/// tabulated renewal density `u`.
pub fn renewal_correlations(u: &Tabulated, rho1: f64, points: &[f64]) -> Result<f64> {
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Constraint("points must be ascending".into()));
    }
    Ok(points.windows(2).fold(rho1, |acc, w| acc * u.eval(w[1] - w[0])))
}

/// `sum_n f(n) e^{int}` of a probability vector.
pub fn lattice_characteristic(p: &[f64], t: f64) -> Complex<f64> {
    p.iter().enumerate().map(|(n, &v)| Complex::from_polar(v, n as f64 * t)).sum()
}
