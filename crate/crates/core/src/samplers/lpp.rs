use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::{build_discrete_kernel, KernelSpec};
use crate::operator::{gap_probability, DiscretizedOperator};
use crate::special::{eval_orthonormal_all, OrthonormalFamily};

fn check(m: usize, n: usize, q: f64) -> Result<()> {
    if !(n >= 1 && m >= n) {
        return Err(Error::Constraint(format!("need M >= N >= 1, got M = {m}, N = {n}")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Constraint(format!("q = {q} must lie in (0, 1)")));
    }
    Ok(())
}

/// Last-passage time `G(M, N)` through an `M x N` array of i.i.d. weights
/// with `P(a = k) = (1 - q) q^k`.
pub fn sample_last_passage<R: Rng + ?Sized>(m: usize, n: usize, q: f64, rng: &mut R) -> Result<u64> {
    check(m.max(n), m.min(n), q)?;
    let lq = q.ln();
    let mut row = vec![0u64; n];
    for _ in 0..m {
        let mut left = 0u64;
        for g in row.iter_mut() {
            let u = 1.0 - rng.random::<f64>();
            let a = (u.ln() / lq).floor() as u64;
            left = left.max(*g) + a;
            *g = left;
        }
    }
    Ok(row[n - 1])
}

/// Sites `from, from + 1, ...` of the Meixner ensemble, cut where the
/// one-point function left outside sums to less than `1e-12`.
pub fn meixner_truncation(m: usize, n: usize, q: f64, from: usize) -> Result<Vec<usize>> {
    check(m, n, q)?;
    let family = OrthonormalFamily::Meixner { q, k: (m - n + 1) as u32 };
    let mut inside = 0.0;
    let mut x = 0usize;
    let mut sites = Vec::new();
    loop {
        let d: f64 = eval_orthonormal_all(family, n, x as f64)?.iter().map(|v| v * v).sum();
        inside += d;
        if x >= from {
            sites.push(x);
        }
        // the one-point function sums to n over the whole lattice
        if n as f64 - inside < 1e-12 && x + 1 >= from {
            return Ok(sites);
        }
        x += 1;
        if x > 10_000_000 {
            return Err(Error::NonConvergence("Meixner one-point function did not close".into()));
        }
    }
}

/// `P(G(M, N) <= t) = det(I - K_Meixner)` on `{t + N, t + N + 1, ...}`.
/// `G(M, N)` and `G(N, M)` have the same law, so either orientation is accepted.
pub fn last_passage_cdf(m: usize, n: usize, q: f64, t: u64) -> Result<f64> {
    let (m, n) = (m.max(n), m.min(n));
    let sites = meixner_truncation(m, n, q, t as usize + n)?;
    if sites.is_empty() {
        return Ok(1.0);
    }
    let labels: Vec<f64> = sites.iter().map(|&x| x as f64).collect();
    let kernel = build_discrete_kernel(&KernelSpec::MeixnerMN { m, n, q }, &labels)?;
    Ok(gap_probability(&DiscretizedOperator::from_discrete(&kernel)).clamp(0.0, 1.0))
}
