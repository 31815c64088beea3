use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;
use crate::scalar::Real;

/// Supported evaluation window for [`airy_ai`].
pub const AIRY_WINDOW: (f64, f64) = (-20.0, 50.0);

const AI0: f64 = 0.355_028_053_887_817_239_26;
const MINUS_AIP0: f64 = 0.258_819_403_792_806_798_41;
const SERIES_EDGE: f64 = 4.0;
const TAYLOR_STEP: f64 = 0.25;

/// `Ai(x)` on the supported window.
pub fn airy_ai<T: Real>(x: T) -> Result<T> {
    airy_ai_pair(x).map(|(a, _)| a)
}

/// `(Ai(x), Ai'(x))` on the supported window.
pub fn airy_ai_pair<T: Real>(x: T) -> Result<(T, T)> {
    let xf = x.as_f64();
    if !(xf >= AIRY_WINDOW.0 && xf <= AIRY_WINDOW.1) {
        return Err(Error::OutsideSupport { what: "Airy argument", value: xf });
    }
    let edge = T::lit(SERIES_EDGE);
    if x.abs() <= edge {
        Ok(maclaurin(x))
    } else if x > edge {
        Ok(laplace_integral(x))
    } else {
        Ok(taylor_march(x))
    }
}

// Ai = c1 f - c2 g with the two Maclaurin series of y'' = x y.
fn maclaurin<T: Real>(x: T) -> (T, T) {
    let x3 = x * x * x;
    let eps = T::epsilon() * T::lit(1e-3);
    let mut f = T::one();
    let mut g = x;
    let mut fp = T::zero();
    let mut gp = T::one();
    let mut tf = T::one();
    let mut tg = x;
    let mut tfp = x * x * T::lit(0.5);
    let mut tgp = T::one();
    fp = fp + tfp;
    for k in 0..200usize {
        let k3 = T::from_usize_lossy(3 * k);
        tf = tf * x3 / ((k3 + T::lit(2.0)) * (k3 + T::lit(3.0)));
        tg = tg * x3 / ((k3 + T::lit(3.0)) * (k3 + T::lit(4.0)));
        tgp = tgp * x3 / ((k3 + T::one()) * (k3 + T::lit(3.0)));
        f = f + tf;
        g = g + tg;
        gp = gp + tgp;
        if k >= 1 {
            tfp = tfp * x3 / (k3 * (k3 + T::lit(2.0)));
            fp = fp + tfp;
        }
        let small = tf.abs() + tg.abs() + tfp.abs() + tgp.abs();
        if k > 2 && small <= eps * (f.abs() + g.abs() + fp.abs() + gp.abs()) {
            break;
        }
    }
    let c1 = T::lit(AI0);
    let c2 = T::lit(MINUS_AIP0);
    (c1 * f - c2 * g, c1 * fp - c2 * gp)
}

// Taylor series of y'' = x y stepped leftward from the series edge.
fn taylor_march<T: Real>(x: T) -> (T, T) {
    let mut x0 = -T::lit(SERIES_EDGE);
    let (mut y, mut yp) = maclaurin(x0);
    let step = T::lit(TAYLOR_STEP);
    while x0 > x {
        let h = if x0 - x > step { -step } else { x - x0 };
        let (ny, nyp) = taylor_step(x0, y, yp, h);
        y = ny;
        yp = nyp;
        x0 = x0 + h;
    }
    (y, yp)
}

fn taylor_step<T: Real>(x0: T, y: T, yp: T, h: T) -> (T, T) {
    // a_{n+2} = (x0 a_n + a_{n-1}) / ((n+1)(n+2))
    let mut a_prev2 = T::zero();
    let mut a_prev = y;
    let mut a_cur = yp;
    let mut val = y + yp * h;
    let mut der = yp;
    let mut hp = h;
    for n in 0..80usize {
        let nf = T::from_usize_lossy(n);
        let a_next = (x0 * a_prev + a_prev2) / ((nf + T::one()) * (nf + T::lit(2.0)));
        let hn1 = hp * h;
        val = val + a_next * hn1;
        der = der + T::from_usize_lossy(n + 2) * a_next * hp;
        hp = hn1;
        a_prev2 = a_prev;
        a_prev = a_cur;
        a_cur = a_next;
        if n > 6 && (a_next * hn1).abs() < T::epsilon() * T::lit(1e-3) * val.abs().max(T::lit(1e-300)) {
            break;
        }
    }
    (val, der)
}

// Ai(x) = e^{-zeta}/pi int_0^inf exp(-sqrt(x) t^2) cos(t^3/3) dt
// and its x-derivative, for x > 0.
fn laplace_integral<T: Real>(x: T) -> (T, T) {
    let sx = x.sqrt();
    let zeta = T::lit(2.0 / 3.0) * x * sx;
    let upper = (T::lit(46.0) / sx).sqrt();
    let (nodes, weights) = gauss_legendre_on(T::zero(), upper, 96);
    let third = T::lit(1.0 / 3.0);
    let mut i0 = T::zero();
    let mut i2 = T::zero();
    for (t, w) in nodes.into_iter().zip(weights) {
        let base = (-sx * t * t).exp() * (t * t * t * third).cos() * w;
        i0 = i0 + base;
        i2 = i2 + base * t * t;
    }
    let pre = (-zeta).exp() / T::PI();
    let ai = pre * i0;
    let aip = -sx * ai - pre * i2 / (T::lit(2.0) * sx);
    (ai, aip)
}
