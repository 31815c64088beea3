use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernels::{DomainKind, KernelSpec};
use crate::special::{eval_orthonormal_all, OrthonormalFamily};

use super::PointConfiguration;

type C64 = Complex<f64>;

/// Grid cells before dyadic refinement of the selected cell.
const INITIAL_CELLS: usize = 1 << 10;
/// A cell is refined until it carries at most this share of the conditional mass.
const CELL_MASS_SHARE: f64 = 1.0 / (1u64 << 20) as f64;
const MIN_MASS: f64 = 1e-12;

/// Sequential sampler for a rank-`n` projection ensemble.
///
/// Each step draws one point from the conditional density
/// `(|f(x)|^2 - sum_s |<w_s, f(x)>|^2) / m`, where `f` is the orthonormal
/// frame and the `w_s` span the directions already used, then removes the
/// direction of the evaluation functional at the new point.
#[derive(Clone)]
pub struct ProjectionSampler {
    n: usize,
    backend: Backend,
}

impl std::fmt::Debug for ProjectionSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.backend {
            Backend::Trig(_) => "trig",
            Backend::Grid(_) => "grid",
            Backend::Lattice(_) => "lattice",
        };
        f.debug_struct("ProjectionSampler").field("n", &self.n).field("backend", &kind).finish()
    }
}

#[derive(Clone)]
enum Backend {
    Trig(Trig),
    Grid(Grid),
    Lattice(Lattice),
}

impl ProjectionSampler {
    pub fn new(spec: &KernelSpec<f64>) -> Result<Self> {
        spec.validate()?;
        let backend = match *spec {
            KernelSpec::CueN { n } | KernelSpec::SoEven { n } | KernelSpec::SoOdd { n } | KernelSpec::Sp { n } => {
                Backend::Trig(Trig::new(spec, n))
            }
            KernelSpec::HermiteN { n } => {
                let r = (2.0 * n as f64).sqrt() + 6.0;
                Backend::Grid(Grid::new(OrthonormalFamily::Hermite, n, -r, r)?)
            }
            KernelSpec::LaguerreN { n, alpha } => {
                let family = OrthonormalFamily::Laguerre { alpha };
                let edge = 4.0 * n as f64 + 2.0 * alpha + 2.0;
                let mut hi = edge;
                while frame_norm(family, n, hi)? > 1e-18 * n as f64 {
                    hi += 1.0 + 0.05 * edge;
                }
                Backend::Grid(Grid::new(family, n, 0.0, hi)?)
            }
            KernelSpec::MeixnerMN { m, n, q } => {
                let family = OrthonormalFamily::Meixner { q, k: (m - n + 1) as u32 };
                Backend::Lattice(Lattice::new(family, n)?)
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} is not a finite-rank projection family with a sampler",
                    spec.name()
                )))
            }
        };
        Ok(Self { n: spec.rank().expect("projection families have finite rank"), backend })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PointConfiguration> {
        let (points, domain) = match &self.backend {
            Backend::Trig(t) => (t.sample(rng)?, DomainKind::Circle),
            Backend::Grid(g) => (g.sample(rng)?, DomainKind::Real1D),
            Backend::Lattice(l) => (l.sample(rng)?, DomainKind::NonNegativeIntegers),
        };
        debug_assert_eq!(points.len(), self.n);
        Ok(PointConfiguration::new(points, domain))
    }
}

/// One draw; builds a [`ProjectionSampler`] on every call.
pub fn sample_projection_dpp<R: Rng + ?Sized>(spec: &KernelSpec<f64>, rng: &mut R) -> Result<PointConfiguration> {
    ProjectionSampler::new(spec)?.sample(rng)
}

fn frame_norm(family: OrthonormalFamily<f64>, n: usize, x: f64) -> Result<f64> {
    Ok(eval_orthonormal_all(family, n, x)?.iter().map(|v| v * v).sum())
}

// ---------------------------------------------------------------------------
// circle families: frames are trigonometric polynomials, so every conditional
// density is one too and its CDF is available in closed form

#[derive(Clone)]
struct Trig {
    n: usize,
    length: f64,
    /// `(frequency index, coefficient)` terms of each (phase-shifted) frame function
    terms: Vec<Vec<(usize, C64)>>,
    fmin: i64,
    /// number of frequencies; the density has lags `|d| < width`
    width: usize,
    size: usize,
    base: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Trig {
    fn new(spec: &KernelSpec<f64>, n: usize) -> Self {
        use std::f64::consts::PI;
        let i2 = C64::new(0.0, 2.0);
        let s = (2.0 / PI).sqrt();
        // frames multiplied by a common unimodular factor so that all
        // frequencies are integers; |.|^2 is unaffected
        let (fmin, raw, length): (i64, Vec<Vec<(i64, C64)>>, f64) = match *spec {
            KernelSpec::CueN { .. } => {
                let c = C64::new(1.0 / (2.0 * PI).sqrt(), 0.0);
                (0, (0..n as i64).map(|k| vec![(k, c)]).collect(), 2.0 * PI)
            }
            KernelSpec::SoEven { .. } => {
                let c = C64::new(s / 2.0, 0.0);
                let f = (0..n as i64)
                    .map(|k| if k == 0 { vec![(0, C64::new(1.0 / PI.sqrt(), 0.0))] } else { vec![(k, c), (-k, c)] })
                    .collect();
                (-(n as i64 - 1), f, PI)
            }
            KernelSpec::SoOdd { .. } => {
                // e^{i t/2} sin((k + 1/2) t) = (e^{i(k+1)t} - e^{-ikt}) / 2i
                let c = s / i2;
                (-(n as i64 - 1), (0..n as i64).map(|k| vec![(k + 1, c), (-k, -c)]).collect(), PI)
            }
            KernelSpec::Sp { .. } => {
                let c = s / i2;
                (-(n as i64), (1..=n as i64).map(|k| vec![(k, c), (-k, -c)]).collect(), PI)
            }
            _ => unreachable!("trig backend only serves circle families"),
        };
        let fmax = raw.iter().flatten().map(|t| t.0).max().unwrap_or(0);
        let width = (fmax - fmin + 1) as usize;
        let size = (4 * width).max(64).next_power_of_two();
        let terms: Vec<Vec<(usize, C64)>> =
            raw.into_iter().map(|v| v.into_iter().map(|(f, c)| ((f - fmin) as usize, c)).collect()).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut t = Self { n, length, terms, fmin, width, size, base: Vec::new(), fwd, inv };
        t.base = (0..size)
            .map(|j| {
                let x = 2.0 * PI * j as f64 / size as f64;
                t.frame(x).iter().map(|v| v.norm_sqr()).sum()
            })
            .collect();
        t
    }

    fn frame(&self, x: f64) -> Vec<C64> {
        self.terms
            .iter()
            .map(|ts| ts.iter().map(|&(f, c)| c * C64::from_polar(1.0, (f as i64 + self.fmin) as f64 * x)).sum())
            .collect()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        use std::f64::consts::PI;
        let size = self.size;
        let step = 2.0 * PI / size as f64;
        let last = if self.length > 4.0 { size } else { size / 2 };
        let mut dens = self.base.clone();
        let mut used: Vec<Vec<C64>> = Vec::with_capacity(self.n);
        let mut points = Vec::with_capacity(self.n);
        let mut buf = vec![C64::new(0.0, 0.0); size];
        let mut cdf = vec![0.0; last + 1];
        for _ in 0..self.n {
            // Fourier coefficients of the current density
            for (b, &d) in buf.iter_mut().zip(&dens) {
                *b = C64::new(d, 0.0);
            }
            self.fwd.process(&mut buf);
            let coef: Vec<C64> = buf[..self.width].iter().map(|c| c / size as f64).collect();
            // grid CDF: c_0 t + sum_{d != 0} c_d (e^{idt} - 1) / (id)
            let mut b = vec![C64::new(0.0, 0.0); size];
            let mut shift = C64::new(0.0, 0.0);
            for (d, c) in coef.iter().enumerate().skip(1) {
                let v = c / C64::new(0.0, d as f64);
                b[d] = v;
                b[size - d] = v.conj();
                shift += v + v.conj();
            }
            self.inv.process(&mut b);
            for (j, slot) in cdf.iter_mut().enumerate() {
                *slot = coef[0].re * step * j as f64 + (b[j % size] - shift).re;
            }
            let total = cdf[last];
            if !(total > MIN_MASS) {
                return Err(Error::Sampler(format!("conditional mass {total:e} vanished on the grid")));
            }
            let u = rng.random::<f64>() * total;
            let j = cdf.partition_point(|&v| v <= u).clamp(1, last) - 1;
            let x = solve_cdf(&coef, u, step * j as f64, step * (j + 1) as f64).min(self.length.next_down());

            let frame = self.frame(x);
            let mut w: Vec<C64> = frame.iter().map(|v| v.conj()).collect();
            for prev in &used {
                let dot: C64 = prev.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (x, p) in w.iter_mut().zip(prev) {
                    *x -= dot * p;
                }
            }
            let norm = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::Sampler("sampled point carries no conditional mass".into()));
            }
            w.iter_mut().for_each(|v| *v /= norm);
            buf.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for (wk, ts) in w.iter().zip(&self.terms) {
                for &(f, c) in ts {
                    buf[f] += wk * c;
                }
            }
            self.inv.process(&mut buf);
            for (d, g) in dens.iter_mut().zip(&buf) {
                *d -= g.norm_sqr();
            }
            used.push(w);
            points.push(x);
        }
        Ok(points)
    }
}

/// CDF and density of the trigonometric density with coefficients `coef`
/// (lags `0..coef.len()`, conjugate-symmetric).
fn cdf_and_density(coef: &[C64], t: f64) -> (f64, f64) {
    let z = C64::from_polar(1.0, t);
    let mut p = C64::new(1.0, 0.0);
    let mut cdf = coef[0].re * t;
    let mut dens = coef[0].re;
    for (d, c) in coef.iter().enumerate().skip(1) {
        p *= z;
        cdf += 2.0 * (c * (p - 1.0) / C64::new(0.0, d as f64)).re;
        dens += 2.0 * (c * p).re;
    }
    (cdf, dens)
}

/// Safeguarded Newton for `F(t) = u` on `[lo, hi]`.
fn solve_cdf(coef: &[C64], u: f64, mut lo: f64, mut hi: f64) -> f64 {
    let (flo, _) = cdf_and_density(coef, lo);
    let (fhi, _) = cdf_and_density(coef, hi);
    let mut x = if fhi > flo { lo + (hi - lo) * ((u - flo) / (fhi - flo)).clamp(0.0, 1.0) } else { 0.5 * (lo + hi) };
    for _ in 0..100 {
        let (f, d) = cdf_and_density(coef, x);
        let r = f - u;
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - r / d;
        let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) || hi - lo <= 1e-15 * hi.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

// ---------------------------------------------------------------------------
// real-line families: Simpson masses on a fixed grid, then dyadic refinement
// inside the selected cell

#[derive(Clone)]
struct Grid {
    family: OrthonormalFamily<f64>,
    n: usize,
    nodes: Vec<f64>,
    /// frame values, `n` per node
    frames: Vec<f64>,
}

impl Grid {
    fn new(family: OrthonormalFamily<f64>, n: usize, lo: f64, hi: f64) -> Result<Self> {
        let count = 2 * INITIAL_CELLS + 1;
        let nodes: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
        let mut frames = Vec::with_capacity(count * n);
        for &x in &nodes {
            frames.extend(eval_orthonormal_all(family, n, x)?);
        }
        Ok(Self { family, n, nodes, frames })
    }

    fn density(&self, used: &[Vec<f64>], frame: &[f64]) -> f64 {
        let mut d: f64 = frame.iter().map(|v| v * v).sum();
        for w in used {
            let g: f64 = w.iter().zip(frame).map(|(a, b)| a * b).sum();
            d -= g * g;
        }
        d.max(0.0)
    }

    fn exact(&self, used: &[Vec<f64>], x: f64) -> Result<f64> {
        Ok(self.density(used, &eval_orthonormal_all(self.family, self.n, x)?))
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let n = self.n;
        let h = self.nodes[2] - self.nodes[0];
        let mut dens: Vec<f64> = self.frames.chunks(n).map(|f| f.iter().map(|v| v * v).sum()).collect();
        let mut used: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        let simpson = |w: f64, a: f64, m: f64, b: f64| (w / 6.0 * (a + 4.0 * m + b)).max(0.0);
        for _ in 0..n {
            let masses: Vec<f64> =
                (0..INITIAL_CELLS).map(|c| simpson(h, dens[2 * c], dens[2 * c + 1], dens[2 * c + 2])).collect();
            let total: f64 = masses.iter().sum();
            if !(total > MIN_MASS) {
                return Err(Error::Sampler(format!("conditional mass {total:e} vanished on the grid")));
            }
            let c = pick(&masses, rng.random::<f64>() * total);
            let (mut a, mut b) = (self.nodes[2 * c], self.nodes[2 * c + 2]);
            let (mut da, mut dm, mut db) = (dens[2 * c].max(0.0), dens[2 * c + 1].max(0.0), dens[2 * c + 2].max(0.0));
            let mut mass = masses[c];
            while mass > CELL_MASS_SHARE * total && b - a > 1e-13 * b.abs().max(1.0) {
                let m = 0.5 * (a + b);
                let d1 = self.exact(&used, 0.5 * (a + m))?;
                let d3 = self.exact(&used, 0.5 * (m + b))?;
                let left = simpson(m - a, da, d1, dm);
                let right = simpson(b - m, dm, d3, db);
                if left + right <= 0.0 {
                    break;
                }
                if rng.random::<f64>() * (left + right) < left {
                    (b, db, dm, mass) = (m, dm, d1, left);
                } else {
                    (a, da, dm, mass) = (m, dm, d3, right);
                }
            }
            let x = a + (b - a) * linear_inverse(da, db, rng.random::<f64>());

            let frame = eval_orthonormal_all(self.family, n, x)?;
            let mut w = frame.clone();
            for prev in &used {
                let dot: f64 = prev.iter().zip(&w).map(|(p, v)| p * v).sum();
                w.iter_mut().zip(prev).for_each(|(v, p)| *v -= dot * p);
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::Sampler("sampled point carries no conditional mass".into()));
            }
            w.iter_mut().for_each(|v| *v /= norm);
            for (d, f) in dens.iter_mut().zip(self.frames.chunks(n)) {
                let g: f64 = w.iter().zip(f).map(|(a, b)| a * b).sum();
                *d -= g * g;
            }
            used.push(w);
            points.push(x);
        }
        Ok(points)
    }
}

/// Inverse CDF on `[0, 1]` of the density interpolating `da` and `db` linearly.
pub(crate) fn linear_inverse(da: f64, db: f64, v: f64) -> f64 {
    let den = da + (da * da + v * (db * db - da * da)).max(0.0).sqrt();
    if den > 0.0 {
        (v * (da + db) / den).clamp(0.0, 1.0)
    } else {
        v
    }
}

fn pick(masses: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, m) in masses.iter().enumerate() {
        acc += m;
        if u < acc {
            return i;
        }
    }
    masses.iter().rposition(|&m| m > 0.0).unwrap_or(masses.len() - 1)
}

// ---------------------------------------------------------------------------
// lattice families: the ground set is truncated where the one-point function
// has shed all but 1e-14 of its total mass `n`

#[derive(Clone)]
struct Lattice {
    n: usize,
    frames: Vec<f64>,
}

impl Lattice {
    fn new(family: OrthonormalFamily<f64>, n: usize) -> Result<Self> {
        let mut frames = Vec::new();
        let mut acc = 0.0;
        let mut x = 0usize;
        while acc < n as f64 * (1.0 - 1e-14) {
            if x > 10_000_000 {
                return Err(Error::NonConvergence("lattice support did not close".into()));
            }
            let f = eval_orthonormal_all(family, n, x as f64)?;
            acc += f.iter().map(|v| v * v).sum::<f64>();
            frames.extend(f);
            x += 1;
        }
        Ok(Self { n, frames })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let n = self.n;
        let mut dens: Vec<f64> = self.frames.chunks(n).map(|f| f.iter().map(|v| v * v).sum()).collect();
        let mut used: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            dens.iter_mut().for_each(|d| *d = d.max(0.0));
            let total: f64 = dens.iter().sum();
            if !(total > MIN_MASS) {
                return Err(Error::Sampler(format!("conditional mass {total:e} vanished on the lattice")));
            }
            let x = pick(&dens, rng.random::<f64>() * total);
            let mut w = self.frames[x * n..(x + 1) * n].to_vec();
            for prev in &used {
                let dot: f64 = prev.iter().zip(&w).map(|(p, v)| p * v).sum();
                w.iter_mut().zip(prev).for_each(|(v, p)| *v -= dot * p);
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            w.iter_mut().for_each(|v| *v /= norm);
            for (d, f) in dens.iter_mut().zip(self.frames.chunks(n)) {
                let g: f64 = w.iter().zip(f).map(|(a, b)| a * b).sum();
                *d -= g * g;
            }
            dens[x] = 0.0;
            used.push(w);
            points.push(x as f64);
        }
        Ok(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngStream;

    #[test]
    fn circle_samples_have_full_rank() {
        let mut rng = RngStream::new(11, 0).rng();
        for spec in [KernelSpec::CueN { n: 10 }, KernelSpec::SoEven { n: 4 }, KernelSpec::SoOdd { n: 4 }, KernelSpec::Sp { n: 3 }] {
            let s = ProjectionSampler::new(&spec).unwrap();
            let len = spec.circle_length().unwrap();
            for _ in 0..50 {
                let c = s.sample(&mut rng).unwrap();
                assert_eq!(c.len(), spec.rank().unwrap());
                assert!(c.is_strictly_increasing());
                assert!(c.points.iter().all(|&x| (0.0..len).contains(&x)));
            }
        }
    }

    #[test]
    fn real_and_lattice_samples_have_full_rank() {
        let mut rng = RngStream::new(12, 0).rng();
        for spec in [
            KernelSpec::HermiteN { n: 5 },
            KernelSpec::LaguerreN { n: 4, alpha: 1.0 },
            KernelSpec::MeixnerMN { m: 4, n: 3, q: 0.5 },
        ] {
            let s = ProjectionSampler::new(&spec).unwrap();
            for _ in 0..20 {
                let c = s.sample(&mut rng).unwrap();
                assert_eq!(c.len(), spec.rank().unwrap());
                assert!(c.is_strictly_increasing());
            }
        }
    }

    #[test]
    fn trig_cdf_matches_quadrature() {
        // density 1 + cos t on [0, 2 pi]
        let coef = [C64::new(1.0, 0.0), C64::new(0.5, 0.0)];
        let (f, d) = cdf_and_density(&coef, 1.0);
        assert!((f - (1.0 + 1f64.sin())).abs() < 1e-14);
        assert!((d - (1.0 + 1f64.cos())).abs() < 1e-14);
        let x = solve_cdf(&coef, 2.0, 0.0, std::f64::consts::TAU);
        assert!((x + x.sin() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linear_inverse_edges() {
        assert_eq!(linear_inverse(1.0, 1.0, 0.25), 0.25);
        assert!((linear_inverse(0.0, 2.0, 0.25) - 0.5).abs() < 1e-15);
        assert_eq!(linear_inverse(0.0, 0.0, 0.3), 0.3);
    }
}
