use nalgebra::DMatrix;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use vistopo_core::corrnet::moore_penrose_pinv;
use vistopo_core::linalg::svd;
use vistopo_core::{rng, Matrix};

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn rel_frob(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).frobenius_norm() / b.frobenius_norm().max(1e-300)
}

/// `n × n` matrix of the given rank: a product of Gaussian `n × r` and
/// `r × n` factors.
fn low_rank(n: usize, rank: usize, seed: u64) -> Matrix {
    let mut r = rng::seeded(seed);
    let a = Matrix::from_fn(n, rank, |_, _| StandardNormal.sample(&mut r));
    let b = Matrix::from_fn(rank, n, |_, _| StandardNormal.sample(&mut r));
    a.matmul(&b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn penrose_conditions(n in 1usize..=8, rank_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let rank = 1 + (rank_frac * n as f64) as usize % n;
        let a = low_rank(n, rank, seed);
        let p = moore_penrose_pinv(&a, 1e-10);
        prop_assert!(rel_frob(&a.matmul(&p).matmul(&a), &a) <= 1e-8);
        prop_assert!(rel_frob(&p.matmul(&a).matmul(&p), &p) <= 1e-8);
        let ap = a.matmul(&p);
        let pa = p.matmul(&a);
        prop_assert!(ap.sub(&ap.transpose()).max_abs() <= 1e-8);
        prop_assert!(pa.sub(&pa.transpose()).max_abs() <= 1e-8);
    }

    #[test]
    fn pinv_agrees_with_nalgebra(n in 1usize..=8, rank_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let rank = 1 + (rank_frac * n as f64) as usize % n;
        let a = low_rank(n, rank, seed);
        let ours = moore_penrose_pinv(&a, 1e-10);
        let eps = 1e-10 * to_na(&a).singular_values().max();
        let theirs = to_na(&a).pseudo_inverse(eps).unwrap();
        let diff = (to_na(&ours) - &theirs).norm() / theirs.norm();
        prop_assert!(diff <= 1e-8, "relative difference {diff:e}");
    }

    #[test]
    fn singular_values_agree_with_nalgebra(m in 1usize..=9, n in 1usize..=9, seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let a = Matrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut r));
        let ours = svd(&a);
        let mut theirs: Vec<f64> = to_na(&a).singular_values().iter().copied().collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        for (k, t) in theirs.iter().enumerate() {
            prop_assert!((ours.singular_values[k] - t).abs() <= 1e-10 * theirs[0].max(1.0));
        }
        for s in &ours.singular_values[theirs.len()..] {
            prop_assert!(s.abs() <= 1e-10 * theirs[0].max(1.0));
        }
    }
}

#[test]
fn pinv_of_zero_is_zero() {
    let z = Matrix::zeros(3, 3);
    assert_eq!(moore_penrose_pinv(&z, 1e-10), z);
}
