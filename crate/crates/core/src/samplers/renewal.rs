use rand::Rng;

use crate::error::Result;
use crate::kernels::DomainKind;
use crate::renewal::{DelayMode, IntervalLaw, RenewalSpec};

use super::projection::linear_inverse;
use super::PointConfiguration;

/// Inverse CDF of an interval law: trapezoid masses per grid cell, linear
/// density inside a cell.
#[derive(Debug, Clone)]
enum Inverse {
    Density { step: f64, values: Vec<f64>, cum: Vec<f64> },
    Lattice { cum: Vec<f64> },
}

impl Inverse {
    fn new(law: &IntervalLaw) -> Self {
        match law {
            IntervalLaw::Density(t) => {
                let mut cum = Vec::with_capacity(t.len());
                let mut acc = 0.0;
                cum.push(0.0);
                for w in t.values.windows(2) {
                    acc += 0.5 * t.step * (w[0].max(0.0) + w[1].max(0.0));
                    cum.push(acc);
                }
                Inverse::Density { step: t.step, values: t.values.iter().map(|v| v.max(0.0)).collect(), cum }
            }
            IntervalLaw::Lattice(p) => {
                let mut acc = 0.0;
                Inverse::Lattice {
                    cum: p
                        .iter()
                        .map(|v| {
                            acc += v.max(0.0);
                            acc
                        })
                        .collect(),
                }
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Inverse::Density { step, values, cum } => {
                let total = *cum.last().expect("non-empty table");
                let u = rng.random::<f64>() * total;
                let i = cum.partition_point(|&c| c <= u).clamp(1, cum.len() - 1) - 1;
                let v = if cum[i + 1] > cum[i] { ((u - cum[i]) / (cum[i + 1] - cum[i])).clamp(0.0, 1.0) } else { 0.5 };
                step * (i as f64 + linear_inverse(values[i], values[i + 1], v))
            }
            Inverse::Lattice { cum } => {
                let total = *cum.last().expect("non-empty table");
                let u = rng.random::<f64>() * total;
                cum.partition_point(|&c| c <= u).min(cum.len() - 1) as f64
            }
        }
    }
}

/// Reusable sampler for a renewal process: delay, then i.i.d. spacings.
#[derive(Debug, Clone)]
pub struct RenewalSampler {
    interval: Inverse,
    delay: Option<Inverse>,
    domain: DomainKind,
}

impl RenewalSampler {
    pub fn new(spec: &RenewalSpec) -> Result<Self> {
        spec.law.validate()?;
        let delay = match &spec.delay {
            DelayMode::Stationary => Some(Inverse::new(&spec.law.stationary_delay())),
            DelayMode::ZeroDelay => None,
            DelayMode::Custom(d) => Some(Inverse::new(d)),
        };
        let domain = match spec.law {
            IntervalLaw::Density(_) => DomainKind::Real1D,
            IntervalLaw::Lattice(_) => DomainKind::Integers,
        };
        Ok(Self { interval: Inverse::new(&spec.law), delay, domain })
    }

    pub fn spacing<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.interval.draw(rng)
    }

    /// All renewal epochs in `[0, horizon]`.
    pub fn sample<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> PointConfiguration {
        let mut points = Vec::new();
        let mut x = self.delay.as_ref().map_or(0.0, |d| d.draw(rng));
        while x <= horizon {
            points.push(x);
            x += self.interval.draw(rng);
        }
        PointConfiguration { points, domain: self.domain }
    }
}

/// One renewal path on `[0, horizon]`.
pub fn sample_renewal<R: Rng + ?Sized>(spec: &RenewalSpec, horizon: f64, rng: &mut R) -> Result<PointConfiguration> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(crate::error::Error::Constraint(format!("horizon {horizon} must be positive")));
    }
    Ok(RenewalSampler::new(spec)?.sample(horizon, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngStream;

    #[test]
    fn lattice_draws_follow_the_table() {
        let spec = RenewalSpec::new(IntervalLaw::Lattice(vec![0.0, 0.25, 0.75]), DelayMode::ZeroDelay).unwrap();
        let s = RenewalSampler::new(&spec).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        let ones = (0..20_000).filter(|_| s.spacing(&mut rng) == 1.0).count() as f64 / 20_000.0;
        assert!((ones - 0.25).abs() < 0.015);
        let path = s.sample(10.0, &mut rng);
        assert_eq!(path.points[0], 0.0);
        assert!(path.points.windows(2).all(|w| w[1] - w[0] >= 1.0));
    }
}
