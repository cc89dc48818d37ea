//! `run-all`: every stage in order, each skipped when its inputs, its
//! configuration and its recorded outputs are unchanged.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Config, Settings};
use crate::error::{Error, Result};
use crate::io;
use crate::stages::{self, Layout};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct StageRecord {
    key: String,
    outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Manifest {
    stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Cached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub stages: Vec<(&'static str, StageStatus)>,
}

impl RunSummary {
    pub fn status(&self, stage: &str) -> Option<StageStatus> {
        self.stages.iter().find(|s| s.0 == stage).map(|s| s.1)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub force: bool,
    pub reproducible: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

fn relative(root: &Path, p: &Path) -> String {
    p.strip_prefix(root).unwrap_or(p).to_string_lossy().replace('\\', "/")
}

fn hash_outputs(root: &Path, files: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    files
        .iter()
        .map(|f| Ok((relative(root, f), file_hash(f)?)))
        .collect()
}

/// Digest over a set of `(name, hash)` pairs.
fn digest_of(entries: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (k, v) in entries {
        h.update(k.as_bytes());
        h.update([0]);
        h.update(v.as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

fn stage_key(stage: &str, config_text: &str, input_digest: &str, options: &RunOptions) -> String {
    sha256_hex(format!("{stage}\n{config_text}\nreproducible={}\n{input_digest}", options.reproducible).as_bytes())
}

fn is_fresh(root: &Path, record: Option<&StageRecord>, key: &str) -> bool {
    let Some(r) = record else { return false };
    r.key == key
        && r.outputs
            .iter()
            .all(|(rel, h)| file_hash(&root.join(rel)).is_ok_and(|actual| &actual == h))
}

fn clear_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

fn write_if_changed(path: &Path, contents: &str) -> Result<()> {
    if fs::read_to_string(path).is_ok_and(|old| old == contents) {
        return Ok(());
    }
    io::write_file(path, contents)
}

struct Runner<'a> {
    root: PathBuf,
    manifest: Manifest,
    options: RunOptions,
    config: &'a Config,
    summary: RunSummary,
}

impl Runner<'_> {
    /// Runs `body` unless the cached record is still valid; returns the
    /// stage's output hashes either way.
    fn stage(
        &mut self,
        name: &'static str,
        sections: &[&str],
        input_digest: &str,
        body: impl FnOnce() -> Result<Vec<PathBuf>>,
    ) -> Result<BTreeMap<String, String>> {
        let key = stage_key(name, &self.config.section_text(sections), input_digest, &self.options);
        let record = self.manifest.stages.get(name);
        if !self.options.force && is_fresh(&self.root, record, &key) {
            info!("{name}: cached");
            self.summary.stages.push((name, StageStatus::Cached));
            return Ok(record.expect("fresh implies present").outputs.clone());
        }
        info!("{name}: running");
        let files = body().map_err(|e| Error::Stage {
            stage: name,
            source: Box::new(e),
        })?;
        let outputs = hash_outputs(&self.root, &files)?;
        self.manifest.stages.insert(
            name.to_string(),
            StageRecord {
                key,
                outputs: outputs.clone(),
            },
        );
        self.save()?;
        self.summary.stages.push((name, StageStatus::Ran));
        Ok(outputs)
    }

    fn save(&self) -> Result<()> {
        let mut s = serde_json::to_string_pretty(&self.manifest).expect("serializable");
        s.push('\n');
        io::write_file(&self.root.join(MANIFEST), s)
    }
}

fn input_files_digest(dir: &Path) -> Result<String> {
    let mut files = io::list_files(dir, "csv")?;
    files.extend(io::list_files(dir, "labels")?);
    files.sort();
    let entries = files
        .iter()
        .map(|f| Ok((relative(dir, f), file_hash(f)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(digest_of(&entries))
}

/// synth (for synthetic input) → network → persistence → features → train.
pub fn cmd_run_all(config: &Config, out: &Path, options: RunOptions) -> Result<RunSummary> {
    let settings: Settings = config.settings()?;
    let layout = Layout::new(out);
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_if_changed(&out.join("config.txt"), &config.to_text())?;
    let manifest = fs::read_to_string(out.join(MANIFEST))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default();
    let mut run = Runner {
        root: out.to_path_buf(),
        manifest,
        options,
        config,
        summary: RunSummary { stages: Vec::new() },
    };
    let s = &settings;

    let (input_dir, data_digest) = match &s.input {
        None => {
            let data = layout.data_dir();
            let outputs = run.stage("synth", &["seed", "synth"], "", || {
                clear_dir(&data)?;
                stages::cmd_synth(s, &data)
            })?;
            (data, digest_of(&outputs))
        }
        Some(dir) => (dir.clone(), input_files_digest(dir)?),
    };

    let nets = run.stage("network", &["input", "network"], &data_digest, || {
        clear_dir(&layout.networks_dir())?;
        clear_dir(&layout.correlations_dir())?;
        Ok(stages::cmd_network(s, &input_dir, &layout)?.files)
    })?;

    let nets_only: BTreeMap<String, String> = nets
        .into_iter()
        .filter(|(k, _)| k.starts_with("networks/"))
        .collect();
    let diagrams = run.stage("persistence", &["persistence", "diagram"], &digest_of(&nets_only), || {
        clear_dir(&layout.diagrams_dir())?;
        Ok(stages::cmd_persistence(s, &layout.networks_dir(), &layout, options.reproducible)?.files)
    })?;

    let diagram_json: BTreeMap<String, String> = diagrams
        .into_iter()
        .filter(|(k, _)| k.ends_with(".json"))
        .collect();
    let features = run.stage("features", &["seed", "features", "diagram"], &digest_of(&diagram_json), || {
        stages::cmd_features(s, &layout.diagrams_dir(), &layout.features_file())?;
        Ok(vec![layout.features_file()])
    })?;

    run.stage(
        "train",
        &["seed", "subject", "ae", "svm", "pca", "cv", "plot"],
        &digest_of(&features),
        || {
            clear_dir(&layout.plots_dir())?;
            let report = stages::cmd_train(s, &layout.features_file(), &layout, options.reproducible)?;
            Ok(report.artifacts.iter().map(|a| layout.root.join(a)).collect())
        },
    )?;
    Ok(run.summary)
}
