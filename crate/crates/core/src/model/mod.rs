//! Deep-hybrid classifier: standardization, a small autoencoder, PCA and a
//! kernel SVM, with leave-one-out and stratified k-fold evaluation.

pub mod autoencoder;
pub mod cv;
pub mod metrics;
pub mod pca;
pub mod platt;
pub mod scaler;
pub mod svm;

pub use autoencoder::{gradient_check, train_autoencoder, Autoencoder, AutoencoderConfig, TrainingHistory, LATENT_DIM};
pub use cv::{
    fit_fold, fit_pipeline, kfold_cv, loocv, loocv_folds, run_folds, stratified_folds, CvReport, FeatureRoute,
    FitObserver, FitStage, FittedPipeline, FoldResult, PipelineConfig,
};
pub use metrics::{compute_metrics, mean_std, summarize, ClassMetrics, Confusion, MeanStd, Metrics, MetricsSummary};
pub use pca::{fit_pca, transform_pca, PcaModel, PcaSelector};
pub use platt::{fit_platt, platt_calibrate, PlattScaling};
pub use scaler::{standardize_features, StandardScaler};
pub use svm::{decision_function, default_gamma, predict_svm, train_svm, Kernel, KernelSpec, SvmConfig, SvmModel};
