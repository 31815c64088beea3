//! Kernel catalogue: pointwise evaluation, correlation determinants, finite
//! lattice matrices and orthonormal frames of the finite-rank projections.

mod discrete;
mod frame;

pub use discrete::{build_discrete_kernel, DiscreteKernel};
pub use frame::{projection_frame, projection_frames};

use std::cmp::Ordering;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{det, CMatrix};
use crate::point::{config_order, Point};
use crate::quadrature::gauss_legendre_on;
use crate::scalar::{cplx, Cplx, Real};
use crate::special::{airy_ai_pair, bessel_j_real, bessel_j_sequence};

/// Where a kernel family lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Real1D,
    Real2D,
    HalfIntegerLattice,
    NonNegativeIntegers,
    Integers,
    /// Angles; `[0, 2 pi]` for the unitary group, `[0, pi]` otherwise.
    Circle,
}

/// A kernel family together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec<T> {
    /// `sin(pi (x - y)) / (pi (x - y))`
    Sine,
    Airy,
    Bessel { alpha: T },
    /// Christoffel–Darboux kernel of the first `n` Hermite functions.
    HermiteN { n: usize },
    /// Circular unitary ensemble on `[0, 2 pi]`.
    CueN { n: usize },
    /// `SO(2n)` on `[0, pi]`.
    SoEven { n: usize },
    /// `SO(2n + 1)` on `[0, pi]`.
    SoOdd { n: usize },
    /// `Sp(n)` on `[0, pi]`.
    Sp { n: usize },
    /// Infinite Ginibre kernel in the plane.
    Ginibre,
    /// Elliptic (tau-deformed) Ginibre kernel; `n = None` is the large-`n` limit.
    GinibreTau { tau: T, n: Option<usize> },
    /// Limit kernel of weak non-Hermiticity around real coordinate `x_center`.
    WeakNonHermitian { alpha: T, x_center: T },
    LaguerreN { n: usize, alpha: T },
    /// `rho exp(-|x-y|/alpha) exp(i twist (x-y))`; `twist = 0` is the plain kernel.
    Macchi { rho: T, alpha: T, twist: T },
    /// Kernel of the poissonized Plancherel measure on `Z + 1/2`.
    /// Mixed-sign pairs are non-Hermitian and have to be requested explicitly.
    DiscreteBessel { theta: T, allow_mixed_sign: bool },
    /// Meixner ensemble of the geometric last-passage model.
    MeixnerMN { m: usize, n: usize, q: T },
    /// `sum_n (1 - 1/(n^2+1)) phi_n(x) phi_n(y)` with `phi_n` the indicator of `(n, n+1)`.
    BoundedVariance,
    ExplicitDiscrete(DiscreteKernel<T>),
}

impl<T: Real> KernelSpec<T> {
    pub fn macchi(rho: T, alpha: T) -> Self {
        KernelSpec::Macchi { rho, alpha, twist: T::zero() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Sine => "sine",
            KernelSpec::Airy => "airy",
            KernelSpec::Bessel { .. } => "bessel",
            KernelSpec::HermiteN { .. } => "hermite",
            KernelSpec::CueN { .. } => "cue",
            KernelSpec::SoEven { .. } => "so-even",
            KernelSpec::SoOdd { .. } => "so-odd",
            KernelSpec::Sp { .. } => "sp",
            KernelSpec::Ginibre => "ginibre",
            KernelSpec::GinibreTau { .. } => "ginibre-tau",
            KernelSpec::WeakNonHermitian { .. } => "weak-non-hermitian",
            KernelSpec::LaguerreN { .. } => "laguerre",
            KernelSpec::Macchi { .. } => "macchi",
            KernelSpec::DiscreteBessel { .. } => "discrete-bessel",
            KernelSpec::MeixnerMN { .. } => "meixner",
            KernelSpec::BoundedVariance => "bounded-variance",
            KernelSpec::ExplicitDiscrete(_) => "explicit",
        }
    }

    pub fn domain(&self) -> DomainKind {
        match self {
            KernelSpec::Sine
            | KernelSpec::Airy
            | KernelSpec::Bessel { .. }
            | KernelSpec::HermiteN { .. }
            | KernelSpec::LaguerreN { .. }
            | KernelSpec::Macchi { .. } => DomainKind::Real1D,
            KernelSpec::BoundedVariance => DomainKind::Integers,
            KernelSpec::CueN { .. } | KernelSpec::SoEven { .. } | KernelSpec::SoOdd { .. } | KernelSpec::Sp { .. } => {
                DomainKind::Circle
            }
            KernelSpec::Ginibre | KernelSpec::GinibreTau { .. } | KernelSpec::WeakNonHermitian { .. } => DomainKind::Real2D,
            KernelSpec::DiscreteBessel { .. } => DomainKind::HalfIntegerLattice,
            KernelSpec::MeixnerMN { .. } => DomainKind::NonNegativeIntegers,
            KernelSpec::ExplicitDiscrete(_) => DomainKind::Integers,
        }
    }

    /// Rank of the finite-rank projection families.
    pub fn rank(&self) -> Option<usize> {
        match *self {
            KernelSpec::HermiteN { n }
            | KernelSpec::CueN { n }
            | KernelSpec::SoEven { n }
            | KernelSpec::SoOdd { n }
            | KernelSpec::Sp { n }
            | KernelSpec::LaguerreN { n, .. } => Some(n),
            KernelSpec::MeixnerMN { n, .. } => Some(n),
            KernelSpec::GinibreTau { n: Some(n), .. } => Some(n),
            _ => None,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        !matches!(self, KernelSpec::DiscreteBessel { allow_mixed_sign: true, .. })
    }

    /// Length of the angular domain for circle families.
    pub fn circle_length(&self) -> Option<T> {
        match self {
            KernelSpec::CueN { .. } => Some(T::TAU()),
            KernelSpec::SoEven { .. } | KernelSpec::SoOdd { .. } | KernelSpec::Sp { .. } => Some(T::PI()),
            _ => None,
        }
    }

    /// `K(x, y) = k(x - y)` for the translation-invariant families.
    pub fn profile(&self, d: T) -> Option<Cplx<T>> {
        match *self {
            KernelSpec::Sine => Some(cplx(sinc_pi(d))),
            KernelSpec::Macchi { rho, alpha, twist } => {
                let m = rho * (-d.abs() / alpha).exp();
                Some(Complex::from_polar(m, twist * d))
            }
            _ => None,
        }
    }

    pub fn is_translation_invariant(&self) -> bool {
        matches!(self, KernelSpec::Sine | KernelSpec::Macchi { .. })
    }

    /// Parameter constraints of the family.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Constraint(format!("{name} = {v} must be positive")))
            }
        };
        let rank = |n: usize| {
            if n >= 1 {
                Ok(())
            } else {
                Err(Error::Constraint("rank n must be at least 1".into()))
            }
        };
        match self {
            KernelSpec::Sine | KernelSpec::Airy | KernelSpec::Ginibre | KernelSpec::BoundedVariance => Ok(()),
            KernelSpec::Bessel { alpha } => {
                if *alpha > -T::one() {
                    Ok(())
                } else {
                    Err(Error::Constraint(format!("Bessel alpha = {alpha} must exceed -1")))
                }
            }
            KernelSpec::HermiteN { n } | KernelSpec::CueN { n } | KernelSpec::SoEven { n } | KernelSpec::SoOdd { n } | KernelSpec::Sp { n } => {
                rank(*n)
            }
            KernelSpec::GinibreTau { tau, n } => {
                if !(*tau >= T::zero() && *tau < T::one()) {
                    return Err(Error::Constraint(format!("tau = {tau} must lie in [0, 1)")));
                }
                if let Some(n) = n {
                    rank(*n)?;
                }
                Ok(())
            }
            KernelSpec::WeakNonHermitian { alpha, x_center } => {
                positive("alpha", *alpha)?;
                if x_center.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Constraint("x_center must be finite".into()))
                }
            }
            KernelSpec::LaguerreN { n, alpha } => {
                rank(*n)?;
                if *alpha > -T::one() {
                    Ok(())
                } else {
                    Err(Error::Constraint(format!("Laguerre alpha = {alpha} must exceed -1")))
                }
            }
            KernelSpec::Macchi { rho, alpha, twist } => {
                positive("rho", *rho)?;
                positive("alpha", *alpha)?;
                if !twist.is_finite() {
                    return Err(Error::Constraint("twist must be finite".into()));
                }
                let prod = T::lit(2.0) * *rho * *alpha;
                if prod > T::one() + T::lit(1e-12) {
                    return Err(Error::Constraint(format!("2*rho*alpha = {prod} exceeds 1")));
                }
                Ok(())
            }
            KernelSpec::DiscreteBessel { theta, .. } => positive("theta", *theta),
            KernelSpec::MeixnerMN { m, n, q } => {
                if *n < 1 || m < n {
                    return Err(Error::Constraint(format!("Meixner needs M >= N >= 1 (got M = {m}, N = {n})")));
                }
                if !(*q > T::zero() && *q < T::one()) {
                    return Err(Error::Constraint(format!("q = {q} must lie in (0, 1)")));
                }
                Ok(())
            }
            KernelSpec::ExplicitDiscrete(k) => k.check_hermitian(),
        }
    }

    fn check_point(&self, p: &Point<T>) -> Result<()> {
        let bad = |v: f64| Err(Error::OutsideSupport { what: "kernel argument", value: v });
        match (self.domain(), p) {
            (DomainKind::Real1D, Point::Line(x)) => {
                let x = *x;
                if !x.is_finite() {
                    return bad(x.as_f64());
                }
                match self {
                    KernelSpec::Bessel { .. } | KernelSpec::LaguerreN { .. } if x < T::zero() => bad(x.as_f64()),
                    _ => Ok(()),
                }
            }
            (DomainKind::Circle, Point::Line(x)) => {
                let len = self.circle_length().unwrap_or(T::TAU());
                let slack = T::lit(1e-12);
                if *x >= -slack && *x <= len + slack {
                    Ok(())
                } else {
                    bad(x.as_f64())
                }
            }
            (DomainKind::Real2D, Point::Plane(z)) if z.re.is_finite() && z.im.is_finite() => Ok(()),
            (DomainKind::HalfIntegerLattice, Point::Lattice(x)) => {
                let t = *x - T::lit(0.5);
                if t == t.floor() {
                    Ok(())
                } else {
                    bad(x.as_f64())
                }
            }
            (DomainKind::NonNegativeIntegers, Point::Lattice(x)) if *x >= T::zero() && *x == x.floor() => Ok(()),
            (DomainKind::Integers, Point::Lattice(_)) if matches!(self, KernelSpec::ExplicitDiscrete(_)) => Ok(()),
            (DomainKind::Integers, Point::Lattice(x)) if *x == x.floor() => Ok(()),
            (DomainKind::Integers, Point::Line(x)) if matches!(self, KernelSpec::BoundedVariance) && x.is_finite() => Ok(()),
            (_, p) => bad(p.coord().as_f64()),
        }
    }
}

/// `sin(pi d) / (pi d)` with the removable singularity filled in.
pub fn sinc_pi<T: Real>(d: T) -> T {
    if d == T::zero() {
        return T::one();
    }
    let a = T::PI() * d;
    if a.abs() < T::lit(1e-4) {
        let a2 = a * a;
        return T::one() - a2 / T::lit(6.0) + a2 * a2 / T::lit(120.0);
    }
    a.sin() / a
}

/// `sin(m t / 2) / sin(t / 2)`, finite at every multiple of `2 pi`.
pub fn dirichlet<T: Real>(m: usize, t: T) -> T {
    let tau = T::TAU();
    let j = (t / tau).round();
    let r = t - j * tau;
    let mf = T::from_usize_lossy(m);
    let jj = j.to_i64().unwrap_or(0);
    let sign = if ((m as i64 - 1) * jj).rem_euclid(2) == 0 { T::one() } else { -T::one() };
    if r == T::zero() {
        return sign * mf;
    }
    let h = r * T::lit(0.5);
    sign * (mf * h).sin() / h.sin()
}

/// `K(x, y)`. For Hermitian families the pair is evaluated in configuration
/// order and conjugated, so `K(x, y) = conj(K(y, x))` holds exactly.
pub fn eval_kernel<T: Real>(spec: &KernelSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<Cplx<T>> {
    spec.validate()?;
    eval_kernel_unchecked(spec, x, y)
}

/// [`eval_kernel`] without re-validating the family parameters.
pub(crate) fn eval_kernel_unchecked<T: Real>(spec: &KernelSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<Cplx<T>> {
    spec.check_point(x)?;
    spec.check_point(y)?;
    let symmetric_by_formula = matches!(spec, KernelSpec::DiscreteBessel { .. });
    if spec.is_hermitian() && !symmetric_by_formula && config_order(x, y) == Ordering::Greater {
        return raw_kernel(spec, y, x).map(|v| v.conj());
    }
    raw_kernel(spec, x, y)
}

fn line<T: Real>(p: &Point<T>) -> T {
    p.coord()
}

fn plane<T: Real>(p: &Point<T>) -> Cplx<T> {
    match *p {
        Point::Plane(z) => z,
        Point::Line(x) | Point::Lattice(x) => cplx(x),
    }
}

// Symmetric kernels of the form N(x, y) / (x - y) lose digits as y -> x.
// Inside `delta0` interpolate quadratically between the diagonal at the
// midpoint and the exact value at offset `delta0` (no linear term by symmetry).
fn near_diagonal<T: Real>(x: T, y: T, delta0: T, diag: impl Fn(T) -> Result<T>, off: impl Fn(T, T) -> Result<T>) -> Result<T> {
    let half = T::lit(0.5);
    let d = (y - x) * half;
    if d.abs() >= delta0 {
        return off(x, y);
    }
    let m = (x + y) * half;
    let k0 = diag(m)?;
    if d == T::zero() {
        return Ok(k0);
    }
    let k1 = off(m - delta0, m + delta0)?;
    let s = d / delta0;
    Ok(k0 + s * s * (k1 - k0))
}

fn raw_kernel<T: Real>(spec: &KernelSpec<T>, x: &Point<T>, y: &Point<T>) -> Result<Cplx<T>> {
    let two = T::lit(2.0);
    let quarter = T::lit(0.25);
    match spec {
        KernelSpec::Sine | KernelSpec::Macchi { .. } => Ok(spec.profile(line(x) - line(y)).expect("translation invariant")),
        KernelSpec::Airy => {
            let airy_off = |a: T, b: T| -> Result<T> {
                let (ai_a, aip_a) = airy_ai_pair(a)?;
                let (ai_b, aip_b) = airy_ai_pair(b)?;
                Ok((ai_a * aip_b - ai_b * aip_a) / (a - b))
            };
            let airy_diag = |a: T| -> Result<T> {
                let (ai, aip) = airy_ai_pair(a)?;
                Ok(aip * aip - a * ai * ai)
            };
            near_diagonal(line(x), line(y), T::lit(1e-3), airy_diag, airy_off).map(cplx)
        }
        KernelSpec::Bessel { alpha } => {
            let alpha = *alpha;
            let off = |a: T, b: T| -> Result<T> {
                let (sa, sb) = (a.sqrt(), b.sqrt());
                let (ja, ja1) = bessel_j_real(alpha, sa)?;
                let (jb, jb1) = bessel_j_real(alpha, sb)?;
                Ok((sa * ja1 * jb - ja * sb * jb1) / (two * (a - b)))
            };
            let diag = |a: T| -> Result<T> {
                if a == T::zero() {
                    return Ok(if alpha == T::zero() {
                        quarter
                    } else if alpha > T::zero() {
                        T::zero()
                    } else {
                        T::infinity()
                    });
                }
                let s = a.sqrt();
                let (j, j1) = bessel_j_real(alpha, s)?;
                let jm1 = two * alpha / s * j - j1;
                Ok(quarter * (j * j - j1 * jm1))
            };
            let (a, b) = (line(x), line(y));
            let delta0 = (T::lit(1e-3) * a.min(b).max(T::lit(1e-3))).min(T::lit(1e-3));
            if a.min(b) < delta0 && (a - b).abs() < two * delta0 {
                // too close to the hard edge for the symmetric interpolation
                if a == b {
                    return diag(a).map(cplx);
                }
                return off(a, b).map(cplx);
            }
            near_diagonal(a, b, delta0, diag, off).map(cplx)
        }
        KernelSpec::CueN { n } => Ok(cplx(dirichlet(*n, line(x) - line(y)) / T::TAU())),
        KernelSpec::SoEven { n } => {
            let m = 2 * n - 1;
            let (a, b) = (line(x), line(y));
            Ok(cplx((dirichlet(m, a - b) + dirichlet(m, a + b)) / T::TAU()))
        }
        KernelSpec::SoOdd { n } => {
            let m = 2 * n;
            let (a, b) = (line(x), line(y));
            Ok(cplx((dirichlet(m, a - b) - dirichlet(m, a + b)) / T::TAU()))
        }
        KernelSpec::Sp { n } => {
            let m = 2 * n + 1;
            let (a, b) = (line(x), line(y));
            Ok(cplx((dirichlet(m, a - b) - dirichlet(m, a + b)) / T::TAU()))
        }
        KernelSpec::Ginibre => {
            let (z1, z2) = (plane(x), plane(y));
            let e = z1 * z2.conj() - cplx((z1.norm_sqr() + z2.norm_sqr()) * T::lit(0.5));
            Ok(e.exp() / T::PI())
        }
        KernelSpec::GinibreTau { tau, n: None } => {
            let (z1, z2) = (plane(x), plane(y));
            let s = T::one() - *tau * *tau;
            let e = (z1 * z2.conj() - cplx((z1.norm_sqr() + z2.norm_sqr()) * T::lit(0.5))) / s;
            Ok(e.exp() / (T::PI() * s))
        }
        KernelSpec::WeakNonHermitian { alpha, x_center } => {
            let (z1, z2) = (plane(x), plane(y));
            Ok(weak_non_hermitian(*alpha, *x_center, z1, z2))
        }
        KernelSpec::HermiteN { .. } | KernelSpec::LaguerreN { .. } | KernelSpec::MeixnerMN { .. } | KernelSpec::GinibreTau { n: Some(_), .. } => {
            let fx = projection_frame(spec, x)?;
            let fy = projection_frame(spec, y)?;
            Ok(fx.iter().zip(&fy).fold(Complex::zero(), |acc, (a, b)| acc + *a * b.conj()))
        }
        KernelSpec::DiscreteBessel { theta, .. } => Ok(cplx(discrete_bessel(*theta, line(x), line(y)))),
        KernelSpec::BoundedVariance => {
            let (a, b) = (line(x), line(y));
            let (ca, cb) = match (x, y) {
                (Point::Lattice(_), Point::Lattice(_)) => (a, b),
                _ => (a.floor(), b.floor()),
            };
            if ca != cb {
                return Ok(Complex::zero());
            }
            Ok(cplx(bounded_variance_eigenvalue(ca)))
        }
        KernelSpec::ExplicitDiscrete(k) => k.value(line(x), line(y)),
    }
}

/// `1 - 1/(k^2 + 1)`, the spectrum of the bounded-variance kernel.
pub fn bounded_variance_eigenvalue<T: Real>(k: T) -> T {
    T::one() - T::one() / (k * k + T::one())
}

fn weak_non_hermitian<T: Real>(alpha: T, xc: T, z1: Cplx<T>, z2: Cplx<T>) -> Cplx<T> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let reach = T::one() - xc * xc * T::lit(0.25);
    if reach <= T::zero() {
        return Complex::zero();
    }
    let (x1, y1, x2, y2) = (z1.re, z1.im, z2.re, z2.im);
    let arg = Complex::new((y1 + y2) * half, -(x1 - x2) * half);
    let s = reach.sqrt();
    let (nodes, weights) = gauss_legendre_on(-s, s, 64);
    let norm = (two * T::PI()).sqrt();
    let mut g = Complex::zero();
    for (u, w) in nodes.into_iter().zip(weights) {
        let expo = cplx(-alpha * alpha * u * u * half) - arg * (two * u);
        g = g + expo.exp() * (w / norm);
    }
    let pre_re = -(y1 * y1 + y2 * y2) / (alpha * alpha);
    let pre_im = xc * (y1 - y2) * half;
    Complex::new(pre_re, pre_im).exp() * g / (T::PI() * alpha)
}

fn discrete_bessel<T: Real>(theta: T, x: T, y: T) -> T {
    let half = T::lit(0.5);
    let arg = T::lit(2.0) * theta.sqrt();
    let ax = x.abs();
    let ay = y.abs();
    let top = (ax.max(ay) + half).to_usize().unwrap_or(0);
    let extra = (arg.as_f64() + 40.0) as usize;
    let j = bessel_j_sequence(top + extra, arg);
    let idx = |v: T| v.to_usize().unwrap_or(0);
    let (xm, xp) = (idx(ax - half), idx(ax + half));
    let (ym, yp) = (idx(ay - half), idx(ay + half));
    let st = theta.sqrt();
    if x * y > T::zero() {
        if ax == ay {
            // sum_{s >= 1} J_{|x| - 1/2 + s}^2
            return j[xm + 1..].iter().fold(T::zero(), |acc, v| acc + *v * *v);
        }
        st * (j[xm] * j[yp] - j[xp] * j[ym]) / (ax - ay)
    } else {
        st * (j[xm] * j[ym] - j[xp] * j[yp]) / (x - y)
    }
}

/// `det[K(x_i, x_j)]`, with tiny negative round-off floored at zero.
pub fn correlation_det<T: Real>(spec: &KernelSpec<T>, points: &[Point<T>]) -> Result<T> {
    spec.validate()?;
    let gram = gram_matrix(spec, points)?;
    let v = det(&gram).re;
    if v < T::zero() && v > -T::lit(1e-10) && spec.is_hermitian() {
        return Ok(T::zero());
    }
    Ok(v)
}

/// `[K(x_i, x_j)]`.
pub fn gram_matrix<T: Real>(spec: &KernelSpec<T>, points: &[Point<T>]) -> Result<CMatrix<T>> {
    let k = points.len();
    let mut m = CMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = eval_kernel_unchecked(spec, &points[i], &points[j])?;
        }
    }
    Ok(m)
}
