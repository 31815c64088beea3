//! Gauss–Legendre rules and the node/weight schemes used to discretise
//! kernels on windows.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::point::{config_order, Point};
use crate::scalar::Real;

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence, carried out in `f64` and
/// converted at the end.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on<T: Real>(a: T, b: T, n: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(n);
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    (x.iter().map(|&t| mid + half * t).collect(), w.iter().map(|&v| v * half).collect())
}

/// `int_a^b f` with an `n`-point rule split into `panels` equal panels.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize, panels: usize) -> T {
    let (x, w) = gauss_legendre::<T>(n);
    let panels = panels.max(1);
    let h = (b - a) / T::from_usize_lossy(panels);
    let half = h * T::lit(0.5);
    let mut acc = T::zero();
    for p in 0..panels {
        let mid = a + h * (T::from_usize_lossy(p) + T::lit(0.5));
        for (xi, wi) in x.iter().zip(&w) {
            acc = acc + *wi * half * f(mid + half * *xi);
        }
    }
    acc
}

/// Axis-aligned observation window.
#[derive(Debug, Clone, PartialEq)]
pub enum Window<T> {
    Interval(T, T),
    /// Product `[x.0, x.1] x [y.0, y.1]` in the complex plane.
    Rect { x: (T, T), y: (T, T) },
    /// Disjoint union of intervals; each piece is one block.
    Intervals(Vec<(T, T)>),
}

impl<T: Real> Window<T> {
    pub fn volume(&self) -> T {
        match self {
            Window::Interval(a, b) => *b - *a,
            Window::Rect { x, y } => (x.1 - x.0) * (y.1 - y.0),
            Window::Intervals(v) => v.iter().fold(T::zero(), |acc, (a, b)| acc + (*b - *a)),
        }
    }

    pub fn block_count(&self) -> usize {
        match self {
            Window::Intervals(v) => v.len(),
            _ => 1,
        }
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        let inside = |x: T, (a, b): (T, T)| x >= a && x <= b;
        match (self, p) {
            (Window::Interval(a, b), Point::Line(x) | Point::Lattice(x)) => inside(*x, (*a, *b)),
            (Window::Intervals(v), Point::Line(x) | Point::Lattice(x)) => v.iter().any(|&iv| inside(*x, iv)),
            (Window::Rect { x, y }, Point::Plane(z)) => inside(z.re, *x) && inside(z.im, *y),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |a: T, b: T| {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Constraint(format!("window [{a}, {b}] must be finite with a < b")));
            }
            Ok(())
        };
        match self {
            Window::Interval(a, b) => check(*a, *b),
            Window::Rect { x, y } => {
                check(x.0, x.1)?;
                check(y.0, y.1)
            }
            Window::Intervals(v) => {
                if v.is_empty() {
                    return Err(Error::Constraint("empty window list".into()));
                }
                for &(a, b) in v {
                    check(a, b)?;
                }
                let mut sorted = v.clone();
                sorted.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
                for pair in sorted.windows(2) {
                    if pair[1].0 < pair[0].1 {
                        return Err(Error::OverlappingWindows(format!(
                            "[{}, {}] overlaps [{}, {}]",
                            pair[0].0, pair[0].1, pair[1].0, pair[1].1
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Quadrature nodes and weights on a window, sorted in configuration order.
/// `blocks[i]` names the sub-window node `i` belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme<T> {
    pub window: Window<T>,
    pub nodes: Vec<Point<T>>,
    pub weights: Vec<T>,
    pub blocks: Vec<usize>,
}

impl<T: Real> QuadratureScheme<T> {
    /// Gauss–Legendre with `order` nodes per axis (per piece for unions).
    pub fn gauss_legendre(window: &Window<T>, order: usize) -> Result<Self> {
        Self::composite(window, None, order)
    }

    /// Composite Gauss–Legendre: every interval piece is cut into panels of
    /// length at most `panel` (if given), each carrying `order` nodes.
    pub fn composite(window: &Window<T>, panel: Option<T>, order: usize) -> Result<Self> {
        window.validate()?;
        if order < 1 {
            return Err(Error::Constraint("quadrature order must be positive".into()));
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut blocks = Vec::new();
        let mut push_interval = |a: T, b: T, block: usize, nodes: &mut Vec<Point<T>>, weights: &mut Vec<T>| {
            let panels = match panel {
                Some(p) if p > T::zero() => ((b - a) / p).ceil().to_usize().unwrap_or(1).max(1),
                _ => 1,
            };
            let h = (b - a) / T::from_usize_lossy(panels);
            for k in 0..panels {
                let lo = a + h * T::from_usize_lossy(k);
                let hi = if k + 1 == panels { b } else { lo + h };
                let (x, w) = gauss_legendre_on(lo, hi, order);
                for (xi, wi) in x.into_iter().zip(w) {
                    nodes.push(Point::Line(xi));
                    weights.push(wi);
                    blocks.push(block);
                }
            }
        };
        match window {
            Window::Interval(a, b) => push_interval(*a, *b, 0, &mut nodes, &mut weights),
            Window::Intervals(v) => {
                for (j, &(a, b)) in v.iter().enumerate() {
                    push_interval(a, b, j, &mut nodes, &mut weights);
                }
            }
            Window::Rect { x, y } => {
                let (xs, wx) = gauss_legendre_on(x.0, x.1, order);
                let (ys, wy) = gauss_legendre_on(y.0, y.1, order);
                for (xi, wxi) in xs.iter().zip(&wx) {
                    for (yi, wyi) in ys.iter().zip(&wy) {
                        nodes.push(Point::Plane(Complex::new(*xi, *yi)));
                        weights.push(*wxi * *wyi);
                        blocks.push(0);
                    }
                }
            }
        }
        let mut idx: Vec<usize> = (0..nodes.len()).collect();
        idx.sort_by(|&i, &j| config_order(&nodes[i], &nodes[j]));
        Ok(Self {
            window: window.clone(),
            nodes: idx.iter().map(|&i| nodes[i]).collect(),
            weights: idx.iter().map(|&i| weights[i]).collect(),
            blocks: idx.iter().map(|&i| blocks[i]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> T {
        self.weights.iter().fold(T::zero(), |acc, w| acc + *w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64, 257, 512] {
            let (x, w) = gauss_legendre::<f64>(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for deg in 0..(2 * n).min(30) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert_abs_diff_eq!(got, want, epsilon = 1e-13);
            }
            for pair in x.windows(2) {
                assert!(pair[0] < pair[1]);
            }
        }
    }

    #[test]
    fn f32_rule_is_usable() {
        let (_, w) = gauss_legendre::<f32>(20);
        assert!((w.iter().sum::<f32>() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn schemes_cover_window_volume() {
        let s = QuadratureScheme::gauss_legendre(&Window::Interval(0.0, 1.0), 64).unwrap();
        assert_abs_diff_eq!(s.weight_sum(), 1.0, epsilon = 1e-12);
        let r = QuadratureScheme::gauss_legendre(&Window::Rect { x: (-1.0, 1.0), y: (0.0, 2.0) }, 12).unwrap();
        assert_abs_diff_eq!(r.weight_sum(), 4.0, epsilon = 1e-12);
        let c = QuadratureScheme::composite(&Window::Interval(-50.0, 50.0), Some(1.0), 12).unwrap();
        assert_eq!(c.len(), 1200);
        assert_abs_diff_eq!(c.weight_sum(), 100.0, epsilon = 1e-10);
        for pair in c.nodes.windows(2) {
            assert!(pair[0].coord() < pair[1].coord());
        }
    }

    #[test]
    fn overlapping_unions_are_rejected() {
        let w = Window::Intervals(vec![(0.0, 1.0), (0.5, 2.0)]);
        assert!(matches!(QuadratureScheme::gauss_legendre(&w, 8), Err(Error::OverlappingWindows(_))));
        let ok = Window::Intervals(vec![(1.0, 2.0), (0.0, 1.0)]);
        let s = QuadratureScheme::gauss_legendre(&ok, 8).unwrap();
        assert_eq!(s.blocks.iter().filter(|&&b| b == 0).count(), 8);
    }
}
