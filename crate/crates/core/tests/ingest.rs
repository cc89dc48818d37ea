use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use vistopo_core::ingest::{
    detrend, split_by_class, synth_class_dataset, zscore, PatternParams, SyntheticSpec, TimeSeriesMatrix,
};
use vistopo_core::{rng, Matrix};

fn random_series(n: usize, m: usize, seed: u64) -> TimeSeriesMatrix {
    let mut r = rng::seeded(seed);
    let trend: f64 = StandardNormal.sample(&mut r);
    TimeSeriesMatrix::from_matrix(Matrix::from_fn(n, m, |i, t| {
        let g: f64 = StandardNormal.sample(&mut r);
        g + trend * (i as f64 + 1.0) * t as f64 / m as f64
    }))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detrend_is_idempotent(n in 1usize..6, m in 3usize..60, seed in any::<u64>()) {
        let once = detrend(&random_series(n, m, seed)).unwrap();
        let twice = detrend(&once).unwrap();
        prop_assert!(twice.values().sub(once.values()).max_abs() <= 1e-10);
    }

    #[test]
    fn zscore_moments(n in 1usize..6, m in 3usize..60, seed in any::<u64>()) {
        let z = zscore(&random_series(n, m, seed)).unwrap();
        for row in z.values().iter_rows() {
            let mean = row.iter().sum::<f64>() / m as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
            prop_assert!(mean.abs() <= 1e-12);
            prop_assert!((var.sqrt() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn split_preserves_every_column(m in 1usize..40, seed in any::<u64>()) {
        let tags = ["A", "B", "C"];
        let labels: Vec<String> = (0..m).map(|t| tags[(seed as usize + t * 7) % 3].to_string()).collect();
        let base = random_series(3, m, seed);
        let series = TimeSeriesMatrix::new(base.values().clone(), base.channel_ids().to_vec(), Some(labels.clone())).unwrap();
        let parts = split_by_class(&series).unwrap();
        let mut seen = 0;
        for (tag, part) in &parts {
            let cols: Vec<usize> = (0..m).filter(|&t| &labels[t] == tag).collect();
            prop_assert_eq!(part.timepoints(), cols.len());
            for (k, &t) in cols.iter().enumerate() {
                for i in 0..3 {
                    prop_assert_eq!(part.values()[(i, k)], series.values()[(i, t)]);
                }
            }
            seen += cols.len();
        }
        prop_assert_eq!(seen, m);
    }
}

#[test]
fn synthetic_dataset_is_bitwise_deterministic() {
    let p = PatternParams { edges: 5, strength: 0.5 };
    let spec = SyntheticSpec::planted(10, 40, 1.0, 0.1, &[p, p], 7).unwrap();
    let a = synth_class_dataset(&spec, 3, 9).unwrap();
    let b = synth_class_dataset(&spec, 3, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 6);
    assert_ne!(a, synth_class_dataset(&spec, 3, 10).unwrap());
}
