//! Fold-wise fitting of the standardize → autoencoder → PCA → SVM pipeline.

use alloc::string::String;
use alloc::vec::Vec;

use super::autoencoder::{train_autoencoder, Autoencoder, AutoencoderConfig};
use super::metrics::{compute_metrics, Confusion, Metrics};
use super::pca::{fit_pca, PcaModel, PcaSelector};
use super::scaler::StandardScaler;
use super::svm::{decision_function, train_svm, SvmConfig, SvmModel};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

/// Which representation reaches the SVM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureRoute {
    /// Standardized input features.
    Raw,
    /// Autoencoder latent codes.
    Latent,
    /// PCA of the latent codes.
    LatentPca(PcaSelector),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub route: FeatureRoute,
    pub autoencoder: AutoencoderConfig,
    pub svm: SvmConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStage {
    Scaler,
    Autoencoder,
    Pca,
    Svm,
}

/// Sees the row indices every fitted component is trained on.
pub trait FitObserver {
    fn on_fit(&mut self, stage: FitStage, train_rows: &[usize]);
}

impl FitObserver for () {
    fn on_fit(&mut self, _: FitStage, _: &[usize]) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub scaler: StandardScaler,
    pub autoencoder: Option<Autoencoder>,
    pub pca: Option<(PcaModel, usize)>,
    pub svm: SvmModel,
}

impl FittedPipeline {
    /// Features as seen by the SVM.
    pub fn features(&self, x: &Matrix) -> Result<Matrix> {
        let mut z = self.scaler.transform(x)?;
        if let Some(ae) = &self.autoencoder {
            z = ae.encode(&z)?;
        }
        if let Some((pca, k)) = &self.pca {
            z = pca.project(&z, *k)?;
        }
        Ok(z)
    }

    pub fn decision(&self, x: &Matrix) -> Result<Vec<f64>> {
        decision_function(&self.svm, &self.features(x)?)
    }

    /// Cumulative explained-variance ratio of the kept components.
    pub fn retained_variance(&self) -> Option<f64> {
        self.pca.as_ref().map(|(p, k)| p.cumulative_ratio(*k))
    }
}

/// Fits every stage on `rows` of `x` only. `seed` drives the autoencoder
/// initialisation.
pub fn fit_pipeline(
    x: &Matrix,
    y: &[i8],
    rows: &[usize],
    config: &PipelineConfig,
    seed: u64,
    observer: &mut dyn FitObserver,
) -> Result<FittedPipeline> {
    let xt = x.select_rows(rows);
    let yt: Vec<i8> = rows.iter().map(|&r| y[r]).collect();

    observer.on_fit(FitStage::Scaler, rows);
    let scaler = StandardScaler::fit(&xt);
    let mut z = scaler.transform(&xt)?;

    let mut autoencoder = None;
    let mut pca = None;
    if matches!(config.route, FeatureRoute::Latent | FeatureRoute::LatentPca(_)) {
        observer.on_fit(FitStage::Autoencoder, rows);
        let cfg = AutoencoderConfig {
            seed,
            ..config.autoencoder
        };
        let (ae, _) = train_autoencoder(&z, &cfg)?;
        z = ae.encode(&z)?;
        autoencoder = Some(ae);
    }
    if let FeatureRoute::LatentPca(selector) = config.route {
        observer.on_fit(FitStage::Pca, rows);
        let model = fit_pca(&z)?;
        let k = model.n_components(selector)?;
        z = model.project(&z, k)?;
        pca = Some((model, k));
    }
    observer.on_fit(FitStage::Svm, rows);
    let svm = train_svm(&z, &yt, &config.svm)?;
    Ok(FittedPipeline {
        scaler,
        autoencoder,
        pca,
        svm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub test_rows: Vec<usize>,
    pub decision_values: Vec<f64>,
    pub predictions: Vec<i8>,
    pub components: Option<usize>,
    pub retained_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    /// Out-of-fold prediction for every row, in input order.
    pub predictions: Vec<i8>,
    pub confusion: Confusion,
    pub metrics: Metrics,
    pub warnings: Vec<String>,
}

impl CvReport {
    pub fn accuracy(&self) -> f64 {
        self.metrics.accuracy
    }

    /// Mean retained variance over folds, when PCA is in the pipeline.
    pub fn mean_retained_variance(&self) -> Option<f64> {
        let v: Vec<f64> = self.folds.iter().filter_map(|f| f.retained_variance).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn mean_components(&self) -> Option<f64> {
        let v: Vec<f64> = self.folds.iter().filter_map(|f| f.components.map(|k| k as f64)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn validate(x: &Matrix, y: &[i8]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Shape(alloc::format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if y.iter().any(|&l| l != 1 && l != -1) {
        return Err(Error::Label("labels must be ±1".into()));
    }
    Ok(())
}

/// Runs the given folds. Each fold's autoencoder seed depends only on the
/// master seed and the held-out rows.
pub fn run_folds(
    x: &Matrix,
    y: &[i8],
    folds: &[Vec<usize>],
    config: &PipelineConfig,
    master_seed: u64,
    observer: &mut dyn FitObserver,
) -> Result<CvReport> {
    validate(x, y)?;
    let n = x.rows();
    let mut predictions = alloc::vec![0i8; n];
    let mut results = Vec::with_capacity(folds.len());
    for test in folds {
        let mut is_test = alloc::vec![false; n];
        test.iter().for_each(|&r| is_test[r] = true);
        let train: Vec<usize> = (0..n).filter(|&r| !is_test[r]).collect();
        let fold = fit_fold(x, y, &train, test, config, master_seed, observer)?;
        for (&r, &p) in test.iter().zip(&fold.predictions) {
            predictions[r] = p;
        }
        results.push(fold);
    }
    let confusion = Confusion::from_predictions(y, &predictions);
    Ok(CvReport {
        folds: results,
        predictions,
        confusion,
        metrics: compute_metrics(&confusion),
        warnings: Vec::new(),
    })
}

/// Fits one fold on `train` and scores `test`.
pub fn fit_fold(
    x: &Matrix,
    y: &[i8],
    train: &[usize],
    test: &[usize],
    config: &PipelineConfig,
    master_seed: u64,
    observer: &mut dyn FitObserver,
) -> Result<FoldResult> {
    let seed = rng::seed_for_rows(master_seed, test);
    let pipe = fit_pipeline(x, y, train, config, seed, observer)?;
    let decision_values = pipe.decision(&x.select_rows(test))?;
    let predictions = decision_values.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
    Ok(FoldResult {
        test_rows: test.to_vec(),
        decision_values,
        predictions,
        components: pipe.pca.as_ref().map(|p| p.1),
        retained_variance: pipe.retained_variance(),
    })
}

pub fn loocv_folds(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| alloc::vec![i]).collect()
}

pub fn loocv(x: &Matrix, y: &[i8], config: &PipelineConfig, seed: u64, observer: &mut dyn FitObserver) -> Result<CvReport> {
    if x.rows() < 3 {
        return Err(Error::InsufficientData(alloc::format!(
            "leave-one-out needs at least 3 rows, got {}",
            x.rows()
        )));
    }
    run_folds(x, y, &loocv_folds(x.rows()), config, seed, observer)
}

/// Stratified folds: each class is shuffled with `seed` and dealt
/// round-robin, continuing from where the previous class stopped, so fold
/// sizes differ by at most one. Folds are returned with sorted rows.
pub fn stratified_folds(y: &[i8], k: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    let mut r = rng::seeded(seed);
    let mut folds = alloc::vec![Vec::new(); k];
    let mut next = 0usize;
    for class in [-1i8, 1] {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        members.shuffle(&mut r);
        for m in members {
            folds[next % k].push(m);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds.retain(|f| !f.is_empty());
    folds
}

/// Stratified `k`-fold cross-validation. A class smaller than `k` cannot
/// appear in every fold; this is reported in `warnings` and the folds are
/// built anyway.
pub fn kfold_cv(
    x: &Matrix,
    y: &[i8],
    k: usize,
    config: &PipelineConfig,
    seed: u64,
    observer: &mut dyn FitObserver,
) -> Result<CvReport> {
    validate(x, y)?;
    let n = x.rows();
    if k < 2 || n < k {
        return Err(Error::InsufficientData(alloc::format!("{k}-fold CV on {n} rows")));
    }
    let mut warnings = Vec::new();
    for class in [-1i8, 1] {
        let count = y.iter().filter(|&&l| l == class).count();
        if count < k {
            warnings.push(alloc::format!(
                "class {class:+} has {count} members, fewer than k = {k}; some folds lack it"
            ));
        }
    }
    let folds = stratified_folds(y, k, seed);
    let mut report = run_folds(x, y, &folds, config, seed, observer)?;
    report.warnings = warnings;
    Ok(report)
}
