//! Randomized equivalence suites behind `oracle-check`.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use vistopo_core::corrnet::{partial_correlation, partial_correlation_regression_oracle, DEFAULT_PINV_REL_TOL};
use vistopo_core::ingest::TimeSeriesMatrix;
use vistopo_core::persistence::{check_invariants, compute_dg0, extended_persistence_oracle, FilteredGraph, DEFAULT_ORACLE_BOUND};
use vistopo_core::{rng, Matrix};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteResult {
    pub passed: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn failed(&self) -> usize {
        self.failures.len()
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, case: usize, outcome: Result<(), String>) {
        match outcome {
            Ok(()) => self.passed += 1,
            Err(e) => self.failures.push(format!("case {case}: {e}")),
        }
    }
}

/// Up to `max_vertices` vertices and `max_edges` edges with distinct
/// weights in (0, 1).
pub fn random_graph(seed: u64, max_vertices: usize, max_edges: usize) -> FilteredGraph {
    let mut r = rng::seeded(seed);
    let n = r.random_range(1..=max_vertices);
    let m = r.random_range(0..=max_edges.min(n * (n - 1) / 2));
    let mut pairs = Vec::new();
    while pairs.len() < m {
        let (u, v) = (r.random_range(0..n), r.random_range(0..n));
        let key = (u.min(v), u.max(v));
        if u != v && !pairs.contains(&key) {
            pairs.push(key);
        }
    }
    let mut weights: Vec<f64> = Vec::with_capacity(m);
    while weights.len() < m {
        let w: f64 = r.random_range(0.0..1.0);
        if w > 0.0 && !weights.contains(&w) {
            weights.push(w);
        }
    }
    let edges: Vec<_> = pairs.iter().zip(&weights).map(|(&(u, v), &w)| (u, v, w)).collect();
    FilteredGraph::from_edges(n, &edges, 0.0).expect("valid random graph")
}

pub fn check_graph(fg: &FilteredGraph) -> Result<(), String> {
    let fast = compute_dg0(fg);
    let full = extended_persistence_oracle(fg, DEFAULT_ORACLE_BOUND).map_err(|e| e.to_string())?;
    if fast.dim0 != full.dim0 {
        return Err(format!("dim0 differs: union-find {:?} vs reduction {:?}", fast.dim0, full.dim0));
    }
    check_invariants(fg, &full, true, true).map_err(|e| e.to_string())
}

pub fn persistence_suite(cases: usize, seed: u64) -> SuiteResult {
    let mut res = SuiteResult::default();
    for c in 0..cases {
        let fg = random_graph(rng::derive_seed(seed, c as u64), 12, 20);
        res.record(c, check_graph(&fg));
    }
    res
}

/// `N ≤ 8` channels of correlated Gaussian noise, `M` timepoints.
pub fn random_dataset(seed: u64, max_channels: usize, m: usize) -> TimeSeriesMatrix {
    let mut r = rng::seeded(seed);
    let n = r.random_range(2..=max_channels);
    let mix = Matrix::from_fn(n, n, |i, j| {
        let g: f64 = StandardNormal.sample(&mut r);
        if i == j {
            1.0 + 0.5 * g
        } else {
            0.5 * g
        }
    });
    let z = Matrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut r));
    TimeSeriesMatrix::from_matrix(mix.matmul(&z)).expect("finite data")
}

pub fn check_dataset(series: &TimeSeriesMatrix, tol: f64) -> Result<(), String> {
    let a = partial_correlation(series, DEFAULT_PINV_REL_TOL).map_err(|e| e.to_string())?;
    let b = partial_correlation_regression_oracle(series).map_err(|e| e.to_string())?;
    let worst = a
        .values
        .as_slice()
        .iter()
        .zip(b.values.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if worst <= tol {
        Ok(())
    } else {
        Err(format!("max |precision − regression| = {worst:e} > {tol:e}"))
    }
}

pub fn partial_suite(cases: usize, seed: u64) -> SuiteResult {
    let mut res = SuiteResult::default();
    for c in 0..cases {
        let series = random_dataset(rng::derive_seed(seed, c as u64), 8, 200);
        res.record(c, check_dataset(&series, 1e-8));
    }
    res
}
