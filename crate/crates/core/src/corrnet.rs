//! Marginal and partial correlation matrices and the both-positive network.
//!
//! Partial correlations come from the precision matrix (Moore-Penrose
//! pseudo-inverse of the sample covariance) as `ρ_ij = -ω_ij / √(ω_ii ω_jj)`.
//! [`partial_correlation_regression_oracle`] computes the same quantity the
//! slow way, by correlating regression residuals, and is kept as an
//! independent check.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ingest::TimeSeriesMatrix;
use crate::linalg;
use crate::matrix::Matrix;

/// Default relative cutoff for singular values in the pseudo-inverse.
pub const DEFAULT_PINV_REL_TOL: f64 = 1e-10;

/// Rank test used by the regression oracle, applied to the correlation matrix.
const ORACLE_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    Marginal,
    Partial,
}

impl CorrelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrelationKind::Marginal => "marginal",
            CorrelationKind::Partial => "partial",
        }
    }
}

/// Symmetric channel-by-channel correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub kind: CorrelationKind,
    pub values: Matrix,
}

impl CorrelationMatrix {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }
}

/// Inverse (or pseudo-inverse) of a covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionMatrix {
    pub values: Matrix,
}

/// Unbiased sample covariance (divisor `M − 1`) between channels.
pub fn sample_covariance(series: &TimeSeriesMatrix) -> Result<Matrix> {
    let x = series.values();
    let (n, m) = x.shape();
    if m < 2 {
        return Err(Error::Shape(format!("covariance needs at least 2 timepoints, got {m}")));
    }
    let centered = center_rows(x);
    let mut cov = Matrix::zeros(n, n);
    let denom = (m - 1) as f64;
    for i in 0..n {
        for j in i..n {
            let s: f64 = centered.row(i).iter().zip(centered.row(j)).map(|(a, b)| a * b).sum();
            cov[(i, j)] = s / denom;
            cov[(j, i)] = s / denom;
        }
    }
    Ok(cov)
}

fn center_rows(x: &Matrix) -> Matrix {
    let (n, m) = x.shape();
    let mut out = x.clone();
    for i in 0..n {
        let row = out.row_mut(i);
        let mean = row.iter().sum::<f64>() / m as f64;
        row.iter_mut().for_each(|v| *v -= mean);
    }
    out
}

fn check_nonconstant(series: &TimeSeriesMatrix, cov: &Matrix) -> Result<()> {
    let x = series.values();
    for i in 0..cov.rows() {
        let scale = x.row(i).iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if !(cov[(i, i)] > (1e-12 * scale) * (1e-12 * scale)) {
            return Err(Error::DegenerateChannel {
                channel: series.channel_ids()[i].clone(),
            });
        }
    }
    Ok(())
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

/// Pearson (zero-lag) correlation matrix.
pub fn marginal_correlation(series: &TimeSeriesMatrix) -> Result<CorrelationMatrix> {
    let cov = sample_covariance(series)?;
    check_nonconstant(series, &cov)?;
    let n = cov.rows();
    let sd: Vec<f64> = (0..n).map(|i| libm::sqrt(cov[(i, i)])).collect();
    let values = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            clamp_unit(cov[(i, j)] / (sd[i] * sd[j]))
        }
    });
    Ok(CorrelationMatrix {
        kind: CorrelationKind::Marginal,
        values,
    })
}

/// Moore-Penrose pseudo-inverse; singular values below `rel_tol × σ_max`
/// are zeroed.
pub fn moore_penrose_pinv(matrix: &Matrix, rel_tol: f64) -> Matrix {
    linalg::pinv(matrix, rel_tol)
}

/// Precision matrix estimated as the pseudo-inverse of the sample covariance.
pub fn precision_matrix(series: &TimeSeriesMatrix, rel_tol: f64) -> Result<PrecisionMatrix> {
    let cov = sample_covariance(series)?;
    check_nonconstant(series, &cov)?;
    let mut values = moore_penrose_pinv(&cov, rel_tol);
    let n = values.rows();
    // Symmetrize away round-off.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (values[(i, j)] + values[(j, i)]);
            values[(i, j)] = avg;
            values[(j, i)] = avg;
        }
    }
    Ok(PrecisionMatrix { values })
}

/// Partial correlation of every channel pair given all other channels.
/// The diagonal is reported as 1.
pub fn partial_correlation(series: &TimeSeriesMatrix, rel_tol: f64) -> Result<CorrelationMatrix> {
    let n = series.channels();
    if n < 2 {
        return Err(Error::Shape(format!("partial correlation needs at least 2 channels, got {n}")));
    }
    let omega = precision_matrix(series, rel_tol)?.values;
    partial_from_precision(&omega)
}

/// `ρ_ij = -ω_ij / √(ω_ii ω_jj)` with unit diagonal.
pub fn partial_from_precision(omega: &Matrix) -> Result<CorrelationMatrix> {
    let n = omega.rows();
    if let Some(index) = (0..n).find(|&i| !(omega[(i, i)] > 0.0)) {
        return Err(Error::NumericalDegeneracy { index });
    }
    let values = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            clamp_unit(-omega[(i, j)] / libm::sqrt(omega[(i, i)] * omega[(j, j)]))
        }
    });
    Ok(CorrelationMatrix {
        kind: CorrelationKind::Partial,
        values,
    })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len() as f64;
    let ma = a.iter().sum::<f64>() / m;
    let mb = b.iter().sum::<f64>() / m;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / libm::sqrt(saa * sbb)
}

/// Residual of `target` after least-squares regression (with intercept) on
/// the rows listed in `on`. Rows of `centered` must already be centered.
fn regression_residual(centered: &Matrix, cov: &Matrix, target: usize, on: &[usize]) -> Result<Vec<f64>> {
    let y = centered.row(target);
    if on.is_empty() {
        return Ok(y.to_vec());
    }
    let c_ss = Matrix::from_fn(on.len(), on.len(), |a, b| cov[(on[a], on[b])]);
    let c_sy: Vec<f64> = on.iter().map(|&k| cov[(k, target)]).collect();
    let l = linalg::cholesky(&c_ss, ORACLE_RANK_TOL).map_err(|_| {
        Error::OracleInapplicable(format!("conditioning set for channel {target} is rank deficient"))
    })?;
    let beta = linalg::cholesky_solve(&l, &c_sy);
    let mut r = y.to_vec();
    for (b, &k) in beta.iter().zip(on) {
        for (rt, xt) in r.iter_mut().zip(centered.row(k)) {
            *rt -= b * xt;
        }
    }
    Ok(r)
}

/// Partial correlations from correlated regression residuals.
///
/// For each pair `(i, j)`, channels `i` and `j` are regressed separately on
/// every other channel and the Pearson correlation of the two residual series
/// is reported. Refuses multicollinear input, where the regressions are not
/// unique.
pub fn partial_correlation_regression_oracle(series: &TimeSeriesMatrix) -> Result<CorrelationMatrix> {
    let n = series.channels();
    let cov = sample_covariance(series)?;
    check_nonconstant(series, &cov)?;
    let sd: Vec<f64> = (0..n).map(|i| libm::sqrt(cov[(i, i)])).collect();
    let corr = Matrix::from_fn(n, n, |i, j| cov[(i, j)] / (sd[i] * sd[j]));
    if let Err(e) = linalg::cholesky(&corr, ORACLE_RANK_TOL) {
        return Err(Error::OracleInapplicable(format!(
            "channels are multicollinear (rank test failed at channel {})",
            e.pivot
        )));
    }
    let centered = center_rows(series.values());
    let mut values = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            let ri = regression_residual(&centered, &cov, i, &others)?;
            let rj = regression_residual(&centered, &cov, j, &others)?;
            let rho = clamp_unit(pearson(&ri, &rj));
            values[(i, j)] = rho;
            values[(j, i)] = rho;
        }
    }
    Ok(CorrelationMatrix {
        kind: CorrelationKind::Partial,
        values,
    })
}

/// Undirected weighted edge `(i, j)` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Weighted undirected graph over channels; all weights are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualNetwork {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl VisualNetwork {
    /// Validates and normalizes edges to `i < j`, sorted by `(i, j)`.
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let n = vertices.len();
        let mut norm: Vec<Edge> = Vec::with_capacity(edges.len());
        for e in edges {
            if e.i == e.j {
                return Err(Error::Shape(format!("self-loop at vertex {}", e.i)));
            }
            if e.i >= n || e.j >= n {
                return Err(Error::Shape(format!("edge ({}, {}) outside {n} vertices", e.i, e.j)));
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::Shape(format!(
                    "edge ({}, {}) has non-positive or non-finite weight {}",
                    e.i, e.j, e.weight
                )));
            }
            norm.push(Edge {
                i: e.i.min(e.j),
                j: e.i.max(e.j),
                weight: e.weight,
            });
        }
        norm.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = norm.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::Shape(format!("duplicate edge ({}, {})", w[0].i, w[0].j)));
        }
        Ok(Self { vertices, edges: norm })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = (i.min(j), i.max(j));
        self.edges.iter().any(|e| e.i == a && e.j == b)
    }
}

/// Keeps edge `(i, j)` iff both the marginal and the partial correlation are
/// strictly positive; the edge weight is the partial correlation.
pub fn build_visual_network(
    vertices: Vec<String>,
    marginal: &CorrelationMatrix,
    partial: &CorrelationMatrix,
) -> Result<VisualNetwork> {
    if marginal.kind != CorrelationKind::Marginal || partial.kind != CorrelationKind::Partial {
        return Err(Error::Shape("expected a marginal and a partial correlation matrix".into()));
    }
    let n = marginal.n();
    if partial.n() != n || vertices.len() != n {
        return Err(Error::Shape(format!(
            "dimension mismatch: marginal {n}, partial {}, vertices {}",
            partial.n(),
            vertices.len()
        )));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (r, rho) = (marginal.get(i, j), partial.get(i, j));
            if r > 0.0 && rho > 0.0 {
                edges.push(Edge { i, j, weight: rho });
            }
        }
    }
    VisualNetwork::new(vertices, edges)
}

/// Correlations and the resulting network for one preprocessed series.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkBuild {
    pub marginal: CorrelationMatrix,
    pub partial: CorrelationMatrix,
    pub network: VisualNetwork,
}

/// Marginal + partial correlation and the both-positive network.
pub fn network_from_series(series: &TimeSeriesMatrix, rel_tol: f64) -> Result<NetworkBuild> {
    let marginal = marginal_correlation(series)?;
    let partial = partial_correlation(series, rel_tol)?;
    let network = build_visual_network(series.channel_ids().to_vec(), &marginal, &partial)?;
    Ok(NetworkBuild {
        marginal,
        partial,
        network,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn series(rows: &[&[f64]]) -> TimeSeriesMatrix {
        TimeSeriesMatrix::from_matrix(Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let c = sample_covariance(&series(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]])).unwrap();
        assert_eq!(c, Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]));
        let c = sample_covariance(&series(&[&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]])).unwrap();
        assert_eq!(c, Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]));
        // By hand: means 2 and 7/3; Σ dx·dy = 3, Σ dy² = 14/3; divide by 2.
        let c = sample_covariance(&series(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]])).unwrap();
        assert_abs_diff_eq!(c[(0, 1)], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(1, 1)], 7.0 / 3.0, epsilon = 1e-15);
        assert!(sample_covariance(&series(&[&[1.0]])).is_err());
    }

    #[test]
    fn marginal_examples() {
        let r = marginal_correlation(&series(&[&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0], &[1.0, 2.0, 4.0]])).unwrap();
        assert_eq!(r.get(0, 0), 1.0);
        assert_abs_diff_eq!(r.get(0, 1), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.get(0, 2), 1.5 / libm::sqrt(7.0 / 3.0), epsilon = 1e-15);
        assert_abs_diff_eq!(r.get(0, 2), 0.981_980_506, epsilon = 1e-9);
        assert!(matches!(
            marginal_correlation(&series(&[&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]])),
            Err(Error::DegenerateChannel { .. })
        ));
    }

    #[test]
    fn two_channel_partial_equals_marginal() {
        let s = series(&[&[1.0, 2.0, 3.0, 5.0, 4.0], &[2.0, 1.0, 4.0, 3.0, 6.0]]);
        let r = marginal_correlation(&s).unwrap();
        let p = partial_correlation(&s, DEFAULT_PINV_REL_TOL).unwrap();
        assert_abs_diff_eq!(r.get(0, 1), p.get(0, 1), epsilon = 1e-12);
    }

    #[test]
    fn oracle_rejects_multicollinear_input() {
        let a = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0];
        let b = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - y).collect();
        let s = series(&[&a, &b, &c]);
        assert!(matches!(
            partial_correlation_regression_oracle(&s),
            Err(Error::OracleInapplicable(_))
        ));
        // The pseudo-inverse path still produces an answer.
        assert!(partial_correlation(&s, DEFAULT_PINV_REL_TOL).is_ok());
    }

    #[test]
    fn non_positive_precision_diagonal_is_reported() {
        let omega = Matrix::from_rows(&[[1.0, 0.1], [0.1, 0.0]]);
        assert_eq!(partial_from_precision(&omega), Err(Error::NumericalDegeneracy { index: 1 }));
    }

    fn constant(n: usize, kind: CorrelationKind, off: f64) -> CorrelationMatrix {
        CorrelationMatrix {
            kind,
            values: Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { off }),
        }
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn network_rule_examples() {
        let m = constant(3, CorrelationKind::Marginal, 0.5);
        let p = constant(3, CorrelationKind::Partial, 0.2);
        let g = build_visual_network(ids(3), &m, &p).unwrap();
        assert_eq!(g.edges().len(), 3);
        assert!(g.edges().iter().all(|e| e.weight == 0.2));

        let mut p = p;
        p.values[(1, 2)] = -0.1;
        p.values[(2, 1)] = -0.1;
        let g = build_visual_network(ids(3), &m, &p).unwrap();
        assert!(!g.has_edge(1, 2));
        assert_eq!(g.edges().len(), 2);

        let mut zero = constant(3, CorrelationKind::Partial, 0.2);
        zero.values[(0, 1)] = 0.0;
        zero.values[(1, 0)] = 0.0;
        assert!(!build_visual_network(ids(3), &m, &zero).unwrap().has_edge(0, 1));

        let small = constant(2, CorrelationKind::Partial, 0.2);
        assert!(matches!(build_visual_network(ids(3), &m, &small), Err(Error::Shape(_))));
    }

    #[test]
    fn network_validation() {
        let bad = VisualNetwork::new(ids(2), vec![Edge { i: 0, j: 1, weight: -0.1 }]);
        assert!(bad.is_err());
        let dup = VisualNetwork::new(
            ids(2),
            vec![Edge { i: 0, j: 1, weight: 0.1 }, Edge { i: 1, j: 0, weight: 0.2 }],
        );
        assert!(dup.is_err());
        assert!(VisualNetwork::new(ids(2), vec![Edge { i: 1, j: 1, weight: 0.1 }]).is_err());
    }
}
