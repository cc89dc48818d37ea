//! The pipeline stages: synth → network → persistence → features → train.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use vistopo_core::corrnet::network_from_series;
use vistopo_core::ingest::{
    detrend, split_by_class, synth_class_dataset, zscore, zscore_dropping_degenerate, SyntheticSpec, TimeSeriesMatrix,
};
use vistopo_core::model::{
    self, decision_function, fit_pipeline, kfold_cv, loocv, platt_calibrate, CvReport, FeatureRoute, MeanStd,
    PcaSelector, PipelineConfig,
};
use vistopo_core::persistence::{build_filtration, compute_diagrams, PersistenceDiagram, PointFilter};
use vistopo_core::tdafeat::topo_feature_vector;
use vistopo_core::{rng, Error as CoreError, Matrix};

use crate::config::{selector_label, Settings};
use crate::error::{CoreContext, Error, Result};
use crate::io::{self, FeatureRow};
use crate::svg;

/// Output locations below a root directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.root.join("data")
    }

    pub fn networks_dir(&self) -> PathBuf {
        self.root.join("networks")
    }

    pub fn correlations_dir(&self) -> PathBuf {
        self.root.join("correlations")
    }

    pub fn diagrams_dir(&self) -> PathBuf {
        self.root.join("diagrams")
    }

    pub fn features_file(&self) -> PathBuf {
        self.root.join("features.csv")
    }

    pub fn report_file(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn scree_file(&self) -> PathBuf {
        self.root.join("scree.csv")
    }

    pub fn plots_dir(&self) -> PathBuf {
        self.root.join("plots")
    }
}

/// Separator between a recording's file stem and its class tag in
/// network ids.
pub const CLASS_SEPARATOR: &str = "__";
/// Class of networks whose id carries no class tag.
pub const UNLABELED: &str = "unlabeled";

pub fn class_of(network_id: &str) -> &str {
    network_id
        .rsplit_once(CLASS_SEPARATOR)
        .map(|(_, c)| c)
        .filter(|c| !c.is_empty())
        .unwrap_or(UNLABELED)
}

pub fn synthetic_spec(s: &Settings) -> Result<SyntheticSpec> {
    let p = &s.synth;
    SyntheticSpec::planted(p.channels, p.timepoints, p.noise_sigma, p.margin, &p.patterns, p.precision_seed)
        .context(|| "synthetic spec".into())
}

/// Writes one CSV and label file per (session, class).
pub fn cmd_synth(s: &Settings, data_dir: &Path) -> Result<Vec<PathBuf>> {
    let spec = synthetic_spec(s)?;
    let sessions = synth_class_dataset(&spec, s.synth.sessions, s.seed).context(|| "synthetic data".into())?;
    let mut written = Vec::new();
    for unit in &sessions {
        let path = data_dir.join(format!("s{:02}_{}.csv", unit.session + 1, unit.class));
        io::write_timeseries(&path, &unit.series)?;
        written.push(path);
        written.push(io::labels_path(&written[written.len() - 1]));
    }
    Ok(written)
}

/// A series to turn into one network.
struct Unit {
    id: String,
    series: TimeSeriesMatrix,
}

fn units_of(path: &Path) -> Result<Vec<Unit>> {
    let series = io::read_timeseries(path)?;
    let stem = io::file_stem(path);
    if series.labels().is_none() {
        return Ok(vec![Unit { id: stem, series }]);
    }
    let parts = split_by_class(&series).context(|| path.display().to_string())?;
    Ok(parts
        .into_iter()
        .map(|(class, series)| Unit {
            id: format!("{stem}{CLASS_SEPARATOR}{class}"),
            series,
        })
        .collect())
}

#[derive(Debug, Default)]
pub struct StageOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// detrend → z-score → correlations → both-positive network, per class of
/// every CSV in `input_dir`.
pub fn cmd_network(s: &Settings, input_dir: &Path, layout: &Layout) -> Result<StageOutput> {
    let csvs = io::list_files(input_dir, "csv")?;
    if csvs.is_empty() {
        return Err(Error::parse(input_dir, "no .csv files"));
    }
    let units: Vec<(PathBuf, Unit)> = csvs
        .iter()
        .map(|p| Ok(units_of(p)?.into_iter().map(|u| (p.clone(), u)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut seen = BTreeSet::new();
    if let Some((p, u)) = units.iter().find(|(_, u)| !seen.insert(u.id.clone())) {
        return Err(Error::parse(p, format!("duplicate network id `{}`", u.id)));
    }

    let results: Vec<Result<StageOutput>> = units
        .par_iter()
        .map(|(path, unit)| {
            let ctx = || format!("{} ({})", path.display(), unit.id);
            let mut out = StageOutput::default();
            let detrended = detrend(&unit.series).context(ctx)?;
            let z = if s.drop_degenerate {
                let (z, dropped) = zscore_dropping_degenerate(&detrended).context(ctx)?;
                if !dropped.is_empty() {
                    out.warnings
                        .push(format!("{}: dropped flat channels {}", unit.id, dropped.join(", ")));
                }
                z
            } else {
                zscore(&detrended).context(ctx)?
            };
            let built = network_from_series(&z, s.rel_tol).context(ctx)?;
            if built.network.edges().is_empty() {
                out.warnings.push(format!("{}: network has no edges", unit.id));
            }
            let net_path = layout.networks_dir().join(format!("{}.json", unit.id));
            io::write_file(&net_path, io::network_json(&built.network))?;
            out.files.push(net_path);
            if s.emit_intermediates {
                for c in [&built.marginal, &built.partial] {
                    let p = layout
                        .correlations_dir()
                        .join(format!("{}.{}.json", unit.id, c.kind.as_str()));
                    io::write_file(&p, io::correlation_json(c))?;
                    out.files.push(p);
                }
            }
            Ok(out)
        })
        .collect();
    merge(results)
}

fn merge(results: Vec<Result<StageOutput>>) -> Result<StageOutput> {
    let mut all = StageOutput::default();
    for r in results {
        let r = r?;
        all.files.extend(r.files);
        all.warnings.extend(r.warnings);
    }
    for w in &all.warnings {
        warn!("{w}");
    }
    Ok(all)
}

/// Network JSON files named by `input`: a single file or a directory.
fn network_inputs(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        Ok(vec![input.to_path_buf()])
    } else {
        let files = io::list_files(input, "json")?;
        if files.is_empty() {
            return Err(Error::parse(input, "no network .json files"));
        }
        Ok(files)
    }
}

/// Both diagrams of one network, filtered for output.
pub fn network_diagrams(s: &Settings, net: &vistopo_core::corrnet::VisualNetwork) -> vistopo_core::Result<PersistenceDiagram> {
    let fg = build_filtration(net, s.isolated_value);
    let d = compute_diagrams(&fg, s.oracle_bound)?;
    Ok(d.filtered(PointFilter {
        keep_diagonal: s.keep_diagonal,
        keep_essential: true,
    }))
}

/// Filtration, `Dg0` and `ExDg1` for every network; JSON and SVG per network.
pub fn cmd_persistence(s: &Settings, input: &Path, layout: &Layout, reproducible: bool) -> Result<StageOutput> {
    let files = network_inputs(input)?;
    let results: Vec<Result<StageOutput>> = files
        .par_iter()
        .map(|path| {
            let net = io::read_network(path)?;
            let d = network_diagrams(s, &net).map_err(|e| match e {
                CoreError::OracleBound { vertices, bound } => Error::Config(format!(
                    "{}: {vertices} vertices exceed the extended-persistence bound of {bound}; \
                     raise `persistence.oracle_bound` to process it",
                    path.display()
                )),
                e => Error::Core {
                    context: path.display().to_string(),
                    source: e,
                },
            })?;
            let id = io::file_stem(path);
            let json = layout.diagrams_dir().join(format!("{id}.json"));
            let plot = layout.diagrams_dir().join(format!("{id}.svg"));
            io::write_file(&json, io::diagram_json(&d))?;
            io::write_file(&plot, svg::diagram_svg(&d, &id, reproducible))?;
            Ok(StageOutput {
                files: vec![json, plot],
                warnings: Vec::new(),
            })
        })
        .collect();
    merge(results)
}

/// Largest finite coordinate of a diagram (0 for an empty one).
pub fn max_finite(d: &PersistenceDiagram) -> f64 {
    d.dim0
        .iter()
        .chain(&d.dim1)
        .flat_map(|p| [p.birth, p.death])
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
}

pub fn features_of(s: &Settings, d: &PersistenceDiagram) -> [f64; 12] {
    let options = s.feature_options(max_finite(d));
    topo_feature_vector(&d.dim0, &d.dim1, &options, s.seed).0
}

/// One 12-D feature row per diagram.
pub fn cmd_features(s: &Settings, diagrams_dir: &Path, out_file: &Path) -> Result<(Vec<FeatureRow>, Vec<String>)> {
    let files = io::list_files(diagrams_dir, "json")?;
    if files.is_empty() {
        return Err(Error::parse(diagrams_dir, "no diagram .json files"));
    }
    let rows: Vec<Result<(FeatureRow, Option<String>)>> = files
        .par_iter()
        .map(|path| {
            let d = io::read_diagram(path)?;
            let id = io::file_stem(path);
            let warning = (d.dim0.is_empty() && d.dim1.is_empty()).then(|| format!("{id}: empty diagrams, zero features"));
            Ok((
                FeatureRow {
                    class: class_of(&id).to_string(),
                    network_id: id,
                    values: features_of(s, &d),
                },
                warning,
            ))
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    let mut warnings = Vec::new();
    for r in rows {
        let (row, w) = r?;
        out.push(row);
        warnings.extend(w);
    }
    for w in &warnings {
        warn!("{w}");
    }
    io::write_file(out_file, io::features_csv(&out))?;
    Ok((out, warnings))
}

/// Evaluation protocol of a report cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    Loocv,
    KFold(usize),
}

impl Protocol {
    pub fn label(&self) -> String {
        match self {
            Protocol::Loocv => "loocv".into(),
            Protocol::KFold(k) => format!("{k}-fold"),
        }
    }
}

/// One (feature type, kernel, protocol) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub features: String,
    pub kernel: &'static str,
    pub protocol: Protocol,
    pub pipeline: PipelineConfig,
}

/// Raw 12-D + polynomial (k-fold), latent 4-D + polynomial, then one PCA +
/// RBF cell per selector.
pub fn cell_specs(s: &Settings) -> Vec<CellSpec> {
    let mut cells = vec![
        CellSpec {
            features: "raw12".into(),
            kernel: "poly",
            protocol: Protocol::KFold(s.baseline_folds),
            pipeline: PipelineConfig {
                route: FeatureRoute::Raw,
                autoencoder: s.autoencoder,
                svm: s.svm(s.polynomial()),
            },
        },
        CellSpec {
            features: "latent4".into(),
            kernel: "poly",
            protocol: Protocol::Loocv,
            pipeline: PipelineConfig {
                route: FeatureRoute::Latent,
                autoencoder: s.autoencoder,
                svm: s.svm(s.polynomial()),
            },
        },
    ];
    for sel in &s.selectors {
        cells.push(CellSpec {
            features: selector_label(sel),
            kernel: "rbf",
            protocol: Protocol::Loocv,
            pipeline: PipelineConfig {
                route: FeatureRoute::LatentPca(*sel),
                autoencoder: s.autoencoder,
                svm: s.svm(s.rbf()),
            },
        });
    }
    cells
}

/// Binary task `positive` (+1) vs `negative` (−1).
#[derive(Debug, Clone)]
pub struct Task {
    pub positive: String,
    pub negative: String,
    pub network_ids: Vec<String>,
    pub x: Matrix,
    pub y: Vec<i8>,
}

impl Task {
    pub fn name(&self) -> String {
        format!("{}_vs_{}", self.positive, self.negative)
    }
}

/// Every pair of classes, in sorted order, rows in file order.
pub fn tasks_from_rows(rows: &[FeatureRow]) -> Vec<Task> {
    let classes: Vec<&str> = rows
        .iter()
        .map(|r| r.class.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut tasks = Vec::new();
    for (a, pos) in classes.iter().enumerate() {
        for neg in &classes[a + 1..] {
            let picked: Vec<&FeatureRow> = rows.iter().filter(|r| r.class == *pos || r.class == *neg).collect();
            tasks.push(Task {
                positive: pos.to_string(),
                negative: neg.to_string(),
                network_ids: picked.iter().map(|r| r.network_id.clone()).collect(),
                x: Matrix::from_fn(picked.len(), 12, |i, j| picked[i].values[j]),
                y: picked.iter().map(|r| if r.class == *pos { 1 } else { -1 }).collect(),
            });
        }
    }
    tasks
}

/// CV seed of repeat `r`.
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    rng::derive_seed(seed, r as u64)
}

pub fn run_cell(task: &Task, cell: &CellSpec, seed: u64) -> vistopo_core::Result<CvReport> {
    match cell.protocol {
        Protocol::Loocv => loocv(&task.x, &task.y, &cell.pipeline, seed, &mut ()),
        Protocol::KFold(k) => kfold_cv(&task.x, &task.y, k, &cell.pipeline, seed, &mut ()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanStdJson {
    pub mean: f64,
    pub std: f64,
}

impl From<MeanStd> for MeanStdJson {
    fn from(m: MeanStd) -> Self {
        Self { mean: m.mean, std: m.std }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassJson {
    pub class: String,
    pub precision: MeanStdJson,
    pub recall: MeanStdJson,
    pub f1: MeanStdJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfusionJson {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellJson {
    pub features: String,
    pub kernel: String,
    pub protocol: String,
    pub runs: usize,
    pub accuracy: MeanStdJson,
    pub classes: Vec<ClassJson>,
    pub confusion: Vec<ConfusionJson>,
    /// Out-of-fold labels per run, aligned with the task's `network_ids`.
    pub predictions: Vec<Vec<i8>>,
    pub components: Option<f64>,
    pub cumulative_variance: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskJson {
    pub task: String,
    pub positive: String,
    pub negative: String,
    pub network_ids: Vec<String>,
    pub cells: Vec<CellJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub subject: String,
    pub seed: u64,
    pub tasks: Vec<TaskJson>,
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn cell(&self, task: &str, features: &str) -> Option<&CellJson> {
        self.tasks
            .iter()
            .find(|t| t.task == task)?
            .cells
            .iter()
            .find(|c| c.features == features)
    }
}

fn mean_of(v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = v.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Runs one cell `repeats` times and aggregates mean ± std.
pub fn evaluate_cell(task: &Task, cell: &CellSpec, s: &Settings) -> Result<CellJson> {
    let reports = (0..s.repeats)
        .map(|r| {
            run_cell(task, cell, repeat_seed(s.seed, r)).context(|| {
                format!("subject `{}`, task `{}`, cell `{}`", s.subject, task.name(), cell.features)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let metrics: Vec<_> = reports.iter().map(|r| r.metrics).collect();
    let sum = model::summarize(&metrics);
    let mut warnings: Vec<String> = reports.iter().flat_map(|r| r.warnings.clone()).collect();
    warnings.dedup();
    Ok(CellJson {
        features: cell.features.clone(),
        kernel: cell.kernel.into(),
        protocol: cell.protocol.label(),
        runs: reports.len(),
        accuracy: sum.accuracy.into(),
        classes: vec![
            ClassJson {
                class: task.positive.clone(),
                precision: sum.positive_precision.into(),
                recall: sum.positive_recall.into(),
                f1: sum.positive_f1.into(),
            },
            ClassJson {
                class: task.negative.clone(),
                precision: sum.negative_precision.into(),
                recall: sum.negative_recall.into(),
                f1: sum.negative_f1.into(),
            },
        ],
        confusion: reports
            .iter()
            .map(|r| ConfusionJson {
                tp: r.confusion.tp,
                fp: r.confusion.fp,
                fn_: r.confusion.fn_,
                tn: r.confusion.tn,
            })
            .collect(),
        predictions: reports.iter().map(|r| r.predictions.clone()).collect(),
        components: mean_of(reports.iter().map(|r| r.mean_components())),
        cumulative_variance: mean_of(reports.iter().map(|r| r.mean_retained_variance())),
        warnings,
    })
}

/// First two PCA components of the whole task, SVM decision regions with
/// Platt-scaled shading.
pub fn decision_plot(task: &Task, s: &Settings, reproducible: bool) -> Result<String> {
    let cfg = PipelineConfig {
        route: FeatureRoute::LatentPca(PcaSelector::Components(2)),
        autoencoder: s.autoencoder,
        svm: s.svm(s.rbf()),
    };
    let rows: Vec<usize> = (0..task.x.rows()).collect();
    let ctx = || format!("decision plot for `{}`", task.name());
    let pipe = fit_pipeline(&task.x, &task.y, &rows, &cfg, rng::seed_for_rows(s.seed, &[]), &mut ()).context(ctx)?;
    let scores = pipe.features(&task.x).context(ctx)?;
    let platt = platt_calibrate(&pipe.svm, &scores, &task.y).context(ctx)?;
    let col = |j: usize| scores.column(j);
    let span = |v: Vec<f64>| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = 0.1 * (hi - lo).max(1e-6);
        (lo - pad, hi + pad)
    };
    let ((x0, x1), (y0, y1)) = (span(col(0)), span(col(1)));
    let g = s.plot_grid;
    let grid = Matrix::from_fn(g * g, 2, |i, j| {
        let (iy, ix) = (i / g, i % g);
        if j == 0 {
            x0 + (ix as f64 + 0.5) / g as f64 * (x1 - x0)
        } else {
            y0 + (iy as f64 + 0.5) / g as f64 * (y1 - y0)
        }
    });
    let probability: Vec<f64> = decision_function(&pipe.svm, &grid)
        .context(ctx)?
        .into_iter()
        .map(|d| platt.probability(d))
        .collect();
    let points: Vec<[f64; 2]> = scores.iter_rows().map(|r| [r[0], r[1]]).collect();
    let title = format!("{} (+1) vs {} (-1)", task.positive, task.negative);
    Ok(svg::decision_svg(
        &svg::DecisionPlot {
            title: &title,
            points: &points,
            labels: &task.y,
            bounds: (x0, x1, y0, y1),
            probability: &probability,
            grid: g,
        },
        reproducible,
    ))
}

pub fn scree_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("task,features,components,cumulative_variance,accuracy\n");
    for t in &report.tasks {
        for c in t.cells.iter().filter(|c| c.cumulative_variance.is_some()) {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                t.task,
                c.features,
                c.components.unwrap_or(0.0),
                c.cumulative_variance.unwrap_or(0.0),
                c.accuracy.mean
            ));
        }
    }
    s
}

/// Every task × cell, the scree table and one decision-region plot per task.
pub fn cmd_train(s: &Settings, features_file: &Path, layout: &Layout, reproducible: bool) -> Result<ExperimentReport> {
    let rows = io::parse_features_csv(&io::read_text(features_file)?, features_file)?;
    let tasks = tasks_from_rows(&rows);
    if tasks.is_empty() {
        return Err(Error::Core {
            context: features_file.display().to_string(),
            source: CoreError::Label("need at least two classes".into()),
        });
    }
    let cells = cell_specs(s);
    let jobs: Vec<(usize, usize)> = (0..tasks.len())
        .flat_map(|t| (0..cells.len()).map(move |c| (t, c)))
        .collect();
    let results: Vec<Result<CellJson>> = jobs
        .par_iter()
        .map(|&(t, c)| evaluate_cell(&tasks[t], &cells[c], s))
        .collect();
    let mut results = results.into_iter();

    let mut report = ExperimentReport {
        subject: s.subject.clone(),
        seed: s.seed,
        tasks: Vec::new(),
        artifacts: vec!["report.json".into(), "scree.csv".into()],
    };
    for task in &tasks {
        let mut tj = TaskJson {
            task: task.name(),
            positive: task.positive.clone(),
            negative: task.negative.clone(),
            network_ids: task.network_ids.clone(),
            cells: Vec::new(),
        };
        for _ in &cells {
            tj.cells.push(results.next().expect("one result per job")?);
        }
        report.tasks.push(tj);
    }

    let plots: Vec<Result<(String, String)>> = tasks
        .par_iter()
        .map(|t| Ok((format!("decision_{}.svg", t.name()), decision_plot(t, s, reproducible)?)))
        .collect();
    for p in plots {
        let (name, body) = p?;
        io::write_file(&layout.plots_dir().join(&name), body)?;
        report.artifacts.push(format!("plots/{name}"));
    }
    io::write_file(&layout.scree_file(), scree_csv(&report))?;
    let mut json = serde_json::to_string_pretty(&report).expect("serializable");
    json.push('\n');
    io::write_file(&layout.report_file(), json)?;
    Ok(report)
}
