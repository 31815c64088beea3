mod common;

use detfield::operator::{
    brute_force_oracle, cluster_function_matrix, cluster_integrals, cumulants_from_cluster_integrals, janossy_density,
    mobius_invert, ClusterTable, MobiusDirection,
};
use detfield::{fredholm_genfun, gap_probability, DiscretizedOperator, Point};
use num_complex::Complex64;

fn z_grid() -> Vec<Complex64> {
    vec![
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.35, 0.6),
        Complex64::new(1.0, 0.0),
        Complex64::new(2.5, -0.4),
    ]
}

#[test]
fn two_window_generating_function_matches_enumeration() {
    let mut rng = common::rng(11);
    let blocks = vec![0, 0, 0, 1, 1, 1];
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = common::random_kernel(6, &mut rng);
        let op = DiscretizedOperator::from_discrete_blocks(&k, blocks.clone()).unwrap();
        let oracle = brute_force_oracle(&k).unwrap();
        let table = oracle.block_counts(&blocks);
        for &z1 in &z_grid() {
            for &z2 in &z_grid() {
                let got = fredholm_genfun(&op, &[z1, z2]).unwrap();
                let want: Complex64 =
                    table.iter().map(|(c, p)| z1.powu(c[0] as u32) * z2.powu(c[1] as u32) * p).sum();
                worst = worst.max((got - want).norm());
            }
        }
    }
    assert!(worst < 1e-10, "worst deviation {worst}");
}

#[test]
fn gap_probability_is_empty_configuration() {
    let mut rng = common::rng(12);
    for _ in 0..10 {
        let k = common::random_kernel(7, &mut rng);
        let op = DiscretizedOperator::from_discrete(&k);
        let oracle = brute_force_oracle(&k).unwrap();
        assert!((gap_probability(&op) - oracle.probabilities[0]).abs() < 1e-12);
    }
}

#[test]
fn janossy_densities_match_inclusion_exclusion() {
    let mut rng = common::rng(13);
    for _ in 0..20 {
        let k = common::random_kernel(4, &mut rng);
        let op = DiscretizedOperator::from_discrete(&k);
        let oracle = brute_force_oracle(&k).unwrap();
        let mut total = 0.0;
        for mask in 0..16usize {
            let pts: Vec<Point<f64>> =
                (0..4).filter(|b| mask >> b & 1 == 1).map(|b| Point::Lattice(k.labels()[b])).collect();
            let j = janossy_density(&op, &pts).unwrap();
            assert!((j - oracle.probabilities[mask]).abs() < 1e-10, "mask {mask}: {j} vs {}", oracle.probabilities[mask]);
            total += j;
        }
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn variance_three_ways() {
    let mut rng = common::rng(14);
    let k = common::random_kernel(8, &mut rng);
    let op = DiscretizedOperator::from_discrete(&k);
    let oracle = brute_force_oracle(&k).unwrap();
    let dist = oracle.count_distribution();
    let mean: f64 = dist.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let var: f64 = dist.iter().enumerate().map(|(n, p)| (n as f64 - mean).powi(2) * p).sum();
    assert!((op.count_variance() - var).abs() < 1e-12);
    assert!((op.count_variance_spectral() - var).abs() < 1e-12);
}

#[test]
fn cyclic_expansion_equals_partition_inversion() {
    let mut rng = common::rng(15);
    let mut worst = 0.0f64;
    for l in 1..=4 {
        for _ in 0..10 {
            // arbitrary Hermitian Gram matrix, not necessarily a contraction
            let k = common::random_kernel(l, &mut rng);
            let mut g = k.matrix().clone();
            for i in 0..l {
                for j in 0..l {
                    g[(i, j)] *= 1.7;
                }
            }
            let rho = ClusterTable::correlations_of_gram(&g).unwrap();
            let r = mobius_invert(&rho, MobiusDirection::CorrelationToCluster).unwrap();
            let cyclic = cluster_function_matrix(&g).unwrap();
            worst = worst.max((r.full().unwrap() - cyclic).abs());
            let back = mobius_invert(&r, MobiusDirection::ClusterToCorrelation).unwrap();
            for mask in 1..(1usize << l) {
                worst = worst.max((back.get(mask).unwrap() - rho.get(mask).unwrap()).abs());
            }
        }
    }
    assert!(worst < 1e-12, "worst deviation {worst}");
}

#[test]
fn cumulants_from_cluster_integrals_match_count_law() {
    let mut rng = common::rng(16);
    let k = common::random_kernel(6, &mut rng);
    let op = DiscretizedOperator::from_discrete(&k);
    let v = cluster_integrals(&op, 4).unwrap();
    let c = cumulants_from_cluster_integrals(&v).unwrap();
    let dist = brute_force_oracle(&k).unwrap().count_distribution();
    let raw: Vec<f64> = (0..=4).map(|m| dist.iter().enumerate().map(|(n, p)| (n as f64).powi(m) * p).sum()).collect();
    let k1 = raw[1];
    let k2 = raw[2] - k1 * k1;
    let k3 = raw[3] - 3.0 * raw[2] * k1 + 2.0 * k1.powi(3);
    let m4 = raw[4] - 4.0 * raw[3] * k1 + 6.0 * raw[2] * k1 * k1 - 3.0 * k1.powi(4);
    let k4 = m4 - 3.0 * k2 * k2;
    for (got, want) in c.iter().zip([k1, k2, k3, k4]) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}
