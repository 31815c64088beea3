//! Exact samplers: finite discrete DPPs, finite-rank projection ensembles,
//! renewal processes, the poissonized Plancherel measure and geometric
//! last-passage percolation. All samplers are `f64`.

mod discrete;
mod lpp;
mod plancherel;
mod projection;
mod renewal;

pub use discrete::{sample_discrete_dpp, DiscreteDppSampler};
pub use lpp::{last_passage_cdf, meixner_truncation, sample_last_passage};
pub use plancherel::{frobenius_coordinates, rsk_shape, sample_plancherel_of_size, sample_plancherel_poissonized, PlancherelSample, MAX_THETA};
pub use projection::{sample_projection_dpp, ProjectionSampler};
pub use renewal::{sample_renewal, RenewalSampler};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kernels::DomainKind;

/// Reproducible random stream: identical `(seed, stream)` pairs give
/// identical sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Runs `f(replica, rng)` for every replica on its own stream and returns the
/// results in replica order, whatever the thread count.
pub fn run_replicas<T, F>(seed: u64, replicas: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    let threads = threads.clamp(1, replicas.max(1));
    let one = |r: usize| f(r, &mut RngStream::new(seed, r as u64).rng());
    if threads == 1 {
        return (0..replicas).map(one).collect();
    }
    let chunk = replicas.div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let one = &one;
                scope.spawn(move || (t * chunk..((t + 1) * chunk).min(replicas)).map(one).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("replica worker panicked")).collect()
    })
}

/// Ordered sample of a point process.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    pub points: Vec<f64>,
    pub domain: DomainKind,
}

impl PointConfiguration {
    pub fn new(mut points: Vec<f64>, domain: DomainKind) -> Self {
        points.sort_by(f64::total_cmp);
        Self { points, domain }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points in `[a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        let lo = self.points.partition_point(|&x| x < a);
        let hi = self.points.partition_point(|&x| x <= b);
        hi.saturating_sub(lo)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[0] < w[1])
    }

    /// One point per row under an `x` header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x\n");
        for x in &self.points {
            s.push_str(&format!("{x:.15e}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| RngStream::new(7, 1).rng().random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let b: u64 = RngStream::new(7, 2).rng().random();
        assert_ne!(a[0], b);
    }

    #[test]
    fn replica_results_ignore_thread_count() {
        let f = |r: usize, rng: &mut ChaCha8Rng| (r, rng.random::<u32>());
        assert_eq!(run_replicas(3, 37, 1, f), run_replicas(3, 37, 4, f));
    }

    #[test]
    fn counting_in_intervals() {
        let c = PointConfiguration::new(vec![3.0, 0.0, 1.0], DomainKind::Real1D);
        assert_eq!(c.points, vec![0.0, 1.0, 3.0]);
        assert_eq!(c.count_in(0.0, 1.0), 2);
        assert_eq!(c.count_in(1.5, 2.5), 0);
    }
}
