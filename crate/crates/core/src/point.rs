use std::cmp::Ordering;

use crate::scalar::{Cplx, Real};

/// A point of one of the kernel domains.
///
/// Lattice points carry their coordinate as a real number so that the
/// half-integer lattice `Z + 1/2` and the non-negative integers share one
/// representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point<T> {
    Line(T),
    Plane(Cplx<T>),
    Lattice(T),
}

impl<T: Real> Point<T> {
    pub fn coord(&self) -> T {
        match *self {
            Point::Line(x) | Point::Lattice(x) => x,
            Point::Plane(z) => z.re,
        }
    }

    pub fn modulus(&self) -> T {
        match *self {
            Point::Line(x) | Point::Lattice(x) => x.abs(),
            Point::Plane(z) => z.norm(),
        }
    }
}

/// Configuration ordering: ascending on the line; in the plane by modulus
/// with a lexicographic tie-break.
pub fn config_order<T: Real>(a: &Point<T>, b: &Point<T>) -> Ordering {
    match (a, b) {
        (Point::Plane(za), Point::Plane(zb)) => za
            .norm()
            .partial_cmp(&zb.norm())
            .unwrap_or(Ordering::Equal)
            .then(za.re.partial_cmp(&zb.re).unwrap_or(Ordering::Equal))
            .then(za.im.partial_cmp(&zb.im).unwrap_or(Ordering::Equal)),
        _ => a.coord().partial_cmp(&b.coord()).unwrap_or(Ordering::Equal),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn plane_order_is_modulus_then_lexicographic() {
        let mut pts = vec![
            Point::Plane(Complex::new(0.0, 1.0)),
            Point::Plane(Complex::new(0.5, 0.0)),
            Point::Plane(Complex::new(-1.0, 0.0)),
            Point::Plane(Complex::new(0.0, -1.0)),
        ];
        pts.sort_by(config_order);
        let got: Vec<_> = pts
            .iter()
            .map(|p| match p {
                Point::Plane(z) => (z.re, z.im),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(got, vec![(0.5, 0.0), (-1.0, 0.0), (0.0, -1.0), (0.0, 1.0)]);
    }
}
