use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use vistopo_core::corrnet::{
    marginal_correlation, moore_penrose_pinv, network_from_series, partial_correlation,
    partial_correlation_regression_oracle, DEFAULT_PINV_REL_TOL,
};
use vistopo_core::ingest::{synth_toy_three_node, TimeSeriesMatrix};
use vistopo_core::{rng, Matrix};

/// Channels mixed through a random matrix so that the covariance is dense.
fn mixed(n: usize, m: usize, seed: u64) -> TimeSeriesMatrix {
    let mut r = rng::seeded(seed);
    let a = Matrix::from_fn(n, n, |i, j| {
        let g: f64 = StandardNormal.sample(&mut r);
        if i == j { 1.0 + 0.3 * g } else { 0.4 * g }
    });
    let z = Matrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut r));
    TimeSeriesMatrix::from_matrix(a.matmul(&z)).unwrap()
}

fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn marginal_invariant_under_positive_affine_maps(
        n in 2usize..=6,
        seed in any::<u64>(),
        scales in prop::collection::vec(0.01f64..100.0, 6),
        shifts in prop::collection::vec(-50.0f64..50.0, 6),
    ) {
        let s = mixed(n, 80, seed);
        let mapped = Matrix::from_fn(n, 80, |i, t| scales[i] * s.values()[(i, t)] + shifts[i]);
        let a = marginal_correlation(&s).unwrap();
        let b = marginal_correlation(&TimeSeriesMatrix::from_matrix(mapped).unwrap()).unwrap();
        prop_assert!(max_diff(&a.values, &b.values) <= 1e-12);
    }

    #[test]
    fn precision_path_matches_regression_oracle(n in 2usize..=8, seed in any::<u64>()) {
        let s = mixed(n, 200, seed);
        let a = partial_correlation(&s, DEFAULT_PINV_REL_TOL).unwrap();
        let b = partial_correlation_regression_oracle(&s).unwrap();
        prop_assert!(max_diff(&a.values, &b.values) <= 1e-8);
    }

    #[test]
    fn network_edges_are_both_positive(n in 2usize..=8, seed in any::<u64>()) {
        let built = network_from_series(&mixed(n, 60, seed), DEFAULT_PINV_REL_TOL).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let both = built.marginal.get(i, j) > 0.0 && built.partial.get(i, j) > 0.0;
                prop_assert_eq!(built.network.has_edge(i, j), both);
            }
        }
        for e in built.network.edges() {
            prop_assert!(e.weight > 0.0 && e.i < e.j);
            prop_assert_eq!(e.weight, built.partial.get(e.i, e.j));
        }
    }

    #[test]
    fn correlation_matrices_are_symmetric_and_bounded(n in 2usize..=7, seed in any::<u64>()) {
        let s = mixed(n, 50, seed);
        for c in [marginal_correlation(&s).unwrap(), partial_correlation(&s, DEFAULT_PINV_REL_TOL).unwrap()] {
            prop_assert!(c.values.is_symmetric(0.0));
            prop_assert!(c.values.as_slice().iter().all(|v| v.abs() <= 1.0 + 1e-12));
            prop_assert!((0..n).all(|i| c.get(i, i) == 1.0));
        }
    }
}

#[test]
fn pinv_examples() {
    for n in 1..6 {
        let i = Matrix::identity(n);
        assert!(max_diff(&moore_penrose_pinv(&i, 1e-10), &i) <= 1e-15);
    }
    let ones = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
    let p = moore_penrose_pinv(&ones, 1e-10);
    assert!(max_diff(&p, &Matrix::from_rows(&[[0.25, 0.25], [0.25, 0.25]])) <= 1e-14);
}

#[test]
fn toy_confounder_is_separated() {
    let s = synth_toy_three_node(0.4, 0.9, 0.5, 10_000, 7).unwrap();
    let built = network_from_series(&s, DEFAULT_PINV_REL_TOL).unwrap();
    // Population values: r(Q,R) = 0.36 / sqrt(0.41 · 1.06) ≈ 0.546, ρ(Q,R|P) = 0.
    assert!((built.marginal.get(1, 2) - 0.36 / (0.41f64 * 1.06).sqrt()).abs() < 0.03);
    assert!(built.partial.get(1, 2).abs() < 0.05);
    let oracle = partial_correlation_regression_oracle(&s).unwrap();
    assert!(oracle.get(1, 2).abs() < 0.05);
    assert!(built.network.has_edge(0, 1));
    assert!(built.network.has_edge(0, 2));
    // With ρ = 0 in the population the sampled sign decides the Q–R edge.
    let qr = built.marginal.get(1, 2) > 0.0 && built.partial.get(1, 2) > 0.0;
    assert_eq!(built.network.has_edge(1, 2), qr);
}

#[test]
fn independent_channels_have_near_identity_precision() {
    let mut r = rng::seeded(11);
    let m = 20_000;
    let z = Matrix::from_fn(4, m, |_, _| StandardNormal.sample(&mut r));
    let s = TimeSeriesMatrix::from_matrix(z).unwrap();
    let p = partial_correlation(&s, DEFAULT_PINV_REL_TOL).unwrap();
    // Off-diagonal sampling error is about 1/sqrt(M).
    assert!(max_diff(&p.values, &Matrix::identity(4)) < 5.0 / (m as f64).sqrt());
}

#[test]
fn deterministic_outputs() {
    let s = mixed(6, 100, 3);
    assert_eq!(
        network_from_series(&s, DEFAULT_PINV_REL_TOL).unwrap(),
        network_from_series(&s, DEFAULT_PINV_REL_TOL).unwrap()
    );
}

