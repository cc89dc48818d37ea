//! Labeled multichannel time series: preprocessing, class splitting and
//! synthetic generators.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::Matrix;
use crate::rng;

/// Population standard deviations at or below this (relative to the channel's
/// RMS, floored at 1) mark a channel as flat.
pub const DEGENERATE_STD: f64 = 1e-12;

/// Channels × timepoints signal matrix with optional per-timepoint class tags.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    values: Matrix,
    channel_ids: Vec<String>,
    labels: Option<Vec<String>>,
}

impl TimeSeriesMatrix {
    pub fn new(values: Matrix, channel_ids: Vec<String>, labels: Option<Vec<String>>) -> Result<Self> {
        let (n, m) = values.shape();
        if n == 0 || m == 0 {
            return Err(Error::Shape(format!("time series must be non-empty, got {n}x{m}")));
        }
        if channel_ids.len() != n {
            return Err(Error::Shape(format!(
                "{} channel ids for {n} channels",
                channel_ids.len()
            )));
        }
        for (row, id) in values.iter_rows().zip(&channel_ids) {
            if !row.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("channel `{id}`")));
            }
        }
        if let Some(l) = &labels {
            if l.len() != m {
                return Err(Error::Shape(format!("{} labels for {m} timepoints", l.len())));
            }
        }
        Ok(Self {
            values,
            channel_ids,
            labels,
        })
    }

    /// Unlabeled series with channel ids `c0, c1, ...`.
    pub fn from_matrix(values: Matrix) -> Result<Self> {
        let ids = (0..values.rows()).map(|i| format!("c{i}")).collect();
        Self::new(values, ids, None)
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn channel_ids(&self) -> &[String] {
        &self.channel_ids
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn channels(&self) -> usize {
        self.values.rows()
    }

    pub fn timepoints(&self) -> usize {
        self.values.cols()
    }

    pub fn with_labels(self, labels: Vec<String>) -> Result<Self> {
        Self::new(self.values, self.channel_ids, Some(labels))
    }

    fn map_rows(&self, mut f: impl FnMut(usize, &[f64]) -> Result<Vec<f64>>) -> Result<Self> {
        let (n, m) = self.values.shape();
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in self.values.iter_rows().enumerate() {
            data.extend(f(i, row)?);
        }
        Ok(Self {
            values: Matrix::from_vec(n, m, data),
            channel_ids: self.channel_ids.clone(),
            labels: self.labels.clone(),
        })
    }

    /// Keeps the listed channels.
    pub fn select_channels(&self, keep: &[usize]) -> Self {
        Self {
            values: self.values.select_rows(keep),
            channel_ids: keep.iter().map(|&i| self.channel_ids[i].clone()).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Subtracts the least-squares line over the timepoint index from every
/// channel.
pub fn detrend(series: &TimeSeriesMatrix) -> Result<TimeSeriesMatrix> {
    let m = series.timepoints();
    if m < 2 {
        return Err(Error::Shape(format!("detrend needs at least 2 timepoints, got {m}")));
    }
    let t_mean = (m - 1) as f64 / 2.0;
    let sxx: f64 = (0..m).map(|t| (t as f64 - t_mean) * (t as f64 - t_mean)).sum();
    series.map_rows(|_, row| {
        let y_mean = row.iter().sum::<f64>() / m as f64;
        let sxy: f64 = row
            .iter()
            .enumerate()
            .map(|(t, y)| (t as f64 - t_mean) * (y - y_mean))
            .sum();
        let slope = sxy / sxx;
        Ok(row
            .iter()
            .enumerate()
            .map(|(t, y)| y - y_mean - slope * (t as f64 - t_mean))
            .collect())
    })
}

fn mean_and_population_std(row: &[f64]) -> (f64, f64, f64) {
    let m = row.len() as f64;
    let mean = row.iter().sum::<f64>() / m;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    let rms = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>() / m);
    (mean, libm::sqrt(var), rms)
}

fn is_flat(std: f64, rms: f64) -> bool {
    std <= DEGENERATE_STD * rms.max(1.0)
}

/// Per-channel standardization to mean 0 and population standard deviation 1.
pub fn zscore(series: &TimeSeriesMatrix) -> Result<TimeSeriesMatrix> {
    series.map_rows(|i, row| {
        let (mean, std, rms) = mean_and_population_std(row);
        if is_flat(std, rms) {
            return Err(Error::DegenerateChannel {
                channel: series.channel_ids[i].clone(),
            });
        }
        Ok(row.iter().map(|v| (v - mean) / std).collect())
    })
}

/// Indices of flat (zero-variance) channels.
pub fn degenerate_channels(series: &TimeSeriesMatrix) -> Vec<usize> {
    series
        .values
        .iter_rows()
        .enumerate()
        .filter(|(_, row)| {
            let (_, std, rms) = mean_and_population_std(row);
            is_flat(std, rms)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Drops flat channels and standardizes the rest. Returns the ids of the
/// dropped channels alongside the result.
pub fn zscore_dropping_degenerate(series: &TimeSeriesMatrix) -> Result<(TimeSeriesMatrix, Vec<String>)> {
    let flat = degenerate_channels(series);
    if flat.is_empty() {
        return Ok((zscore(series)?, Vec::new()));
    }
    if flat.len() == series.channels() {
        return Err(Error::DegenerateChannel {
            channel: series.channel_ids[flat[0]].clone(),
        });
    }
    let keep: Vec<usize> = (0..series.channels()).filter(|i| !flat.contains(i)).collect();
    let dropped = flat.iter().map(|&i| series.channel_ids[i].clone()).collect();
    Ok((zscore(&series.select_channels(&keep))?, dropped))
}

/// Splits the columns of a labeled series by class tag, preserving order.
pub fn split_by_class(series: &TimeSeriesMatrix) -> Result<BTreeMap<String, TimeSeriesMatrix>> {
    let labels = series.labels().ok_or(Error::MissingLabels)?;
    let mut columns: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (t, tag) in labels.iter().enumerate() {
        columns.entry(tag.as_str()).or_default().push(t);
    }
    let mut out = BTreeMap::new();
    for (tag, cols) in columns {
        let values = series.values.select_columns(&cols);
        let part = TimeSeriesMatrix {
            values,
            channel_ids: series.channel_ids.clone(),
            labels: Some(vec![tag.to_string(); cols.len()]),
        };
        out.insert(tag.to_string(), part);
    }
    Ok(out)
}

/// Three-node confounder model: `P ~ N(0, 1)`, `Q = a1·P + ε1`,
/// `R = a2·P + ε2` with `ε ~ N(0, sigma²)`.
pub fn synth_toy_three_node(a1: f64, a2: f64, sigma: f64, m: usize, seed: u64) -> Result<TimeSeriesMatrix> {
    if m < 10 {
        return Err(Error::Shape(format!("toy model needs at least 10 timepoints, got {m}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidSpec(format!("noise sigma must be positive, got {sigma}")));
    }
    let mut rng = rng::seeded(seed);
    let mut values = Matrix::zeros(3, m);
    for t in 0..m {
        let p: f64 = StandardNormal.sample(&mut rng);
        let e1: f64 = StandardNormal.sample(&mut rng);
        let e2: f64 = StandardNormal.sample(&mut rng);
        values[(0, t)] = p;
        values[(1, t)] = a1 * p + sigma * e1;
        values[(2, t)] = a2 * p + sigma * e2;
    }
    TimeSeriesMatrix::new(values, vec!["P".into(), "Q".into(), "R".into()], None)
}

/// One planted off-diagonal entry of a class precision matrix. A positive
/// `strength` becomes `-strength` in the precision matrix, i.e. a positive
/// partial correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedEdge {
    pub i: usize,
    pub j: usize,
    pub strength: f64,
}

/// Sparse precision pattern for one class.
///
/// The precision matrix is `Ω_ii = margin + Σ_j |s_ij|`, `Ω_ij = -s_ij`,
/// which is diagonally dominant and hence positive definite whenever
/// `margin > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStructure {
    pub tag: String,
    pub edges: Vec<PlantedEdge>,
    pub margin: f64,
}

/// Edge count and strength of a randomly placed class pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternParams {
    pub edges: usize,
    pub strength: f64,
}

impl ClassStructure {
    /// Places `params.edges` distinct random edges among `channels` nodes.
    pub fn random(tag: &str, channels: usize, params: PatternParams, margin: f64, seed: u64) -> Result<Self> {
        let max_edges = channels * channels.saturating_sub(1) / 2;
        if params.edges > max_edges {
            return Err(Error::InvalidSpec(format!(
                "class `{tag}` asks for {} edges but {channels} channels allow {max_edges}",
                params.edges
            )));
        }
        let mut rng = rng::seeded(seed);
        let mut chosen = BTreeSet::new();
        while chosen.len() < params.edges {
            let i = rng.random_range(0..channels);
            let j = rng.random_range(0..channels);
            if i != j {
                chosen.insert((i.min(j), i.max(j)));
            }
        }
        Ok(Self {
            tag: tag.to_string(),
            edges: chosen
                .into_iter()
                .map(|(i, j)| PlantedEdge {
                    i,
                    j,
                    strength: params.strength,
                })
                .collect(),
            margin,
        })
    }

    pub fn precision(&self, channels: usize) -> Result<Matrix> {
        let mut omega = Matrix::zeros(channels, channels);
        for i in 0..channels {
            omega[(i, i)] = self.margin;
        }
        for e in &self.edges {
            if e.i >= channels || e.j >= channels || e.i == e.j {
                return Err(Error::InvalidSpec(format!(
                    "class `{}` has invalid edge ({}, {})",
                    self.tag, e.i, e.j
                )));
            }
            omega[(e.i, e.j)] -= e.strength;
            omega[(e.j, e.i)] -= e.strength;
            omega[(e.i, e.i)] += e.strength.abs();
            omega[(e.j, e.j)] += e.strength.abs();
        }
        Ok(omega)
    }

    fn pattern(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.i.min(e.j), e.i.max(e.j))).collect()
    }
}

/// Parameters of the planted-precision synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub channels: usize,
    pub timepoints_per_class: usize,
    pub noise_sigma: f64,
    pub gaussian_mean: Vec<f64>,
    pub classes: Vec<ClassStructure>,
    pub precision_seed: u64,
}

impl SyntheticSpec {
    /// Random class patterns, one per entry of `patterns`, tagged `C1, C2, ...`.
    /// Pattern `k` is placed with seed `derive_seed(precision_seed, k)`.
    pub fn planted(
        channels: usize,
        timepoints_per_class: usize,
        noise_sigma: f64,
        margin: f64,
        patterns: &[PatternParams],
        precision_seed: u64,
    ) -> Result<Self> {
        let classes = patterns
            .iter()
            .enumerate()
            .map(|(k, p)| {
                ClassStructure::random(
                    &format!("C{}", k + 1),
                    channels,
                    *p,
                    margin,
                    rng::derive_seed(precision_seed, k as u64),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = Self {
            channels,
            timepoints_per_class,
            noise_sigma,
            gaussian_mean: vec![0.0; channels],
            classes,
            precision_seed,
        };
        spec.class_precisions()?;
        Ok(spec)
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Validates the spec and returns each class's precision matrix.
    pub fn class_precisions(&self) -> Result<Vec<Matrix>> {
        if self.channels < 2 {
            return Err(Error::InvalidSpec("need at least 2 channels".into()));
        }
        if self.timepoints_per_class < 2 {
            return Err(Error::InvalidSpec("need at least 2 timepoints per class".into()));
        }
        if !(self.noise_sigma > 0.0) {
            return Err(Error::InvalidSpec("noise_sigma must be positive".into()));
        }
        if self.gaussian_mean.len() != self.channels {
            return Err(Error::InvalidSpec(format!(
                "gaussian_mean has {} entries for {} channels",
                self.gaussian_mean.len(),
                self.channels
            )));
        }
        if self.classes.is_empty() {
            return Err(Error::InvalidSpec("no classes".into()));
        }
        for (a, ca) in self.classes.iter().enumerate() {
            for cb in &self.classes[a + 1..] {
                if ca.tag == cb.tag {
                    return Err(Error::InvalidSpec(format!("duplicate class tag `{}`", ca.tag)));
                }
                if ca.pattern() == cb.pattern() {
                    return Err(Error::InvalidSpec(format!(
                        "classes `{}` and `{}` share the same edge pattern",
                        ca.tag, cb.tag
                    )));
                }
            }
        }
        self.classes
            .iter()
            .map(|c| {
                let omega = c.precision(self.channels)?;
                linalg::cholesky(&omega, 0.0).map_err(|e| {
                    Error::InvalidSpec(format!(
                        "precision of class `{}` is not positive definite (pivot {})",
                        c.tag, e.pivot
                    ))
                })?;
                Ok(omega)
            })
            .collect()
    }
}

/// One generated recording: session index, class tag and the series.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSession {
    pub session: usize,
    pub class: String,
    pub series: TimeSeriesMatrix,
}

/// Draws `sessions × classes` Gaussian series whose population precision is
/// the planted class precision scaled by `1/noise_sigma²`.
///
/// Unit `(session, class)` uses seed `derive_seed(seed, session·C + class)`.
pub fn synth_class_dataset(spec: &SyntheticSpec, sessions: usize, seed: u64) -> Result<Vec<SyntheticSession>> {
    if sessions < 2 {
        return Err(Error::InvalidSpec(format!("need at least 2 sessions, got {sessions}")));
    }
    let precisions = spec.class_precisions()?;
    let factors = precisions
        .iter()
        .map(|p| linalg::cholesky(p, 0.0).expect("validated above"))
        .collect::<Vec<_>>();
    let n = spec.channels;
    let m = spec.timepoints_per_class;
    let mut out = Vec::with_capacity(sessions * spec.n_classes());
    for s in 0..sessions {
        for (c, class) in spec.classes.iter().enumerate() {
            let index = (s * spec.n_classes() + c) as u64;
            let mut rng = rng::seeded(rng::derive_seed(seed, index));
            let mut values = Matrix::zeros(n, m);
            let mut z = vec![0.0; n];
            for t in 0..m {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                // x = μ + σ L⁻ᵀ z has covariance σ² Ω⁻¹.
                let x = linalg::solve_lower_transpose(&factors[c], &z);
                for i in 0..n {
                    values[(i, t)] = spec.gaussian_mean[i] + spec.noise_sigma * x[i];
                }
            }
            let ids = (0..n).map(|i| format!("v{i}")).collect();
            let series = TimeSeriesMatrix::new(values, ids, Some(vec![class.tag.clone(); m]))?;
            out.push(SyntheticSession {
                session: s,
                class: class.tag.clone(),
                series,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_row(row: &[f64]) -> TimeSeriesMatrix {
        TimeSeriesMatrix::from_matrix(Matrix::from_rows(&[row])).unwrap()
    }

    /// Least-squares line through (t, y) from the 2×2 normal equations.
    fn normal_equation_residuals(y: &[f64]) -> Vec<f64> {
        let m = y.len() as f64;
        let st: f64 = (0..y.len()).map(|t| t as f64).sum();
        let stt: f64 = (0..y.len()).map(|t| (t * t) as f64).sum();
        let sy: f64 = y.iter().sum();
        let sty: f64 = y.iter().enumerate().map(|(t, v)| t as f64 * v).sum();
        let det = m * stt - st * st;
        let intercept = (stt * sy - st * sty) / det;
        let slope = (m * sty - st * sy) / det;
        y.iter()
            .enumerate()
            .map(|(t, v)| v - intercept - slope * t as f64)
            .collect()
    }

    #[test]
    fn detrend_examples() {
        let exact = detrend(&one_row(&[1.0, 2.0, 3.0])).unwrap();
        assert!(exact.values().as_slice().iter().all(|v| v.abs() < 1e-15));
        let flat = detrend(&one_row(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(flat.values().as_slice(), &[0.0, 0.0, 0.0]);

        // Normal equations give slope 0.5, intercept 1.5.
        let oracle = normal_equation_residuals(&[1.0, 3.0, 2.0]);
        assert_abs_diff_eq!(oracle[0], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(oracle[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(oracle[2], -0.5, epsilon = 1e-14);
        let got = detrend(&one_row(&[1.0, 3.0, 2.0])).unwrap();
        for (g, o) in got.values().as_slice().iter().zip(&oracle) {
            assert_abs_diff_eq!(g, o, epsilon = 1e-14);
        }
    }

    #[test]
    fn detrend_needs_two_points() {
        assert!(matches!(detrend(&one_row(&[1.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn zscore_examples() {
        let z = zscore(&one_row(&[1.0, 2.0, 3.0])).unwrap();
        let expected = 1.0 / libm::sqrt(2.0 / 3.0);
        assert_abs_diff_eq!(z.values()[(0, 0)], -expected, epsilon = 1e-14);
        assert_abs_diff_eq!(z.values()[(0, 1)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(z.values()[(0, 2)], expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 1.224_744_871_391_589, epsilon = 1e-12);

        assert_eq!(
            zscore(&one_row(&[0.0, 0.0, 0.0])),
            Err(Error::DegenerateChannel { channel: "c0".into() })
        );
        let unit = zscore(&one_row(&[-1.0, 1.0])).unwrap();
        assert_eq!(unit.values().as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn zscore_drop_flags_flat_channels() {
        let s = TimeSeriesMatrix::from_matrix(Matrix::from_rows(&[[1.0, 2.0, 4.0], [3.0, 3.0, 3.0]])).unwrap();
        let (z, dropped) = zscore_dropping_degenerate(&s).unwrap();
        assert_eq!(dropped, vec!["c1".to_string()]);
        assert_eq!(z.channel_ids(), &["c0".to_string()]);
    }

    #[test]
    fn split_examples() {
        let values = Matrix::from_rows(&[[1.0, 2.0, 3.0]]);
        let tags = |t: &[&str]| t.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let s = TimeSeriesMatrix::new(values.clone(), vec!["v".into()], Some(tags(&["A", "B", "A"]))).unwrap();
        let parts = split_by_class(&s).unwrap();
        assert_eq!(parts["A"].values().as_slice(), &[1.0, 3.0]);
        assert_eq!(parts["B"].values().as_slice(), &[2.0]);

        let all_a = TimeSeriesMatrix::new(values.clone(), vec!["v".into()], Some(tags(&["A", "A", "A"]))).unwrap();
        let parts = split_by_class(&all_a).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts["A"].values(), &values);

        let abc = TimeSeriesMatrix::new(values.clone(), vec!["v".into()], Some(tags(&["A", "B", "C"]))).unwrap();
        let parts = split_by_class(&abc).unwrap();
        assert_eq!(parts.len(), 3);
        assert!(parts.values().all(|p| p.timepoints() == 1));

        let unlabeled = TimeSeriesMatrix::from_matrix(values).unwrap();
        assert_eq!(split_by_class(&unlabeled), Err(Error::MissingLabels));
    }

    #[test]
    fn label_count_mismatch_is_shape_error() {
        let r = TimeSeriesMatrix::new(Matrix::from_rows(&[[1.0, 2.0]]), vec!["v".into()], Some(vec!["A".into()]));
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn toy_model_is_deterministic() {
        let a = synth_toy_three_node(0.4, 0.9, 0.5, 100, 7).unwrap();
        let b = synth_toy_three_node(0.4, 0.9, 0.5, 100, 7).unwrap();
        assert_eq!(a, b);
        assert!(synth_toy_three_node(0.4, 0.9, 0.5, 9, 7).is_err());
    }

    #[test]
    fn class_dataset_cardinality_and_determinism() {
        let spec = SyntheticSpec::planted(
            6,
            40,
            1.0,
            0.5,
            &[PatternParams { edges: 3, strength: 0.3 }, PatternParams { edges: 4, strength: 0.3 }],
            11,
        )
        .unwrap();
        let a = synth_class_dataset(&spec, 3, 5).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(a, synth_class_dataset(&spec, 3, 5).unwrap());
        assert!(synth_class_dataset(&spec, 1, 5).is_err());
    }

    #[test]
    fn non_positive_definite_spec_is_rejected() {
        let mut spec = SyntheticSpec::planted(3, 20, 1.0, 0.5, &[PatternParams { edges: 1, strength: 0.3 }], 1).unwrap();
        spec.classes[0].margin = -5.0;
        assert!(matches!(synth_class_dataset(&spec, 2, 0), Err(Error::InvalidSpec(_))));
    }
}
