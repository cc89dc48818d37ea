//! Flat `key = value` configuration with documented defaults.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are rejected.
//! Command-line `--set key=value` overrides are applied after the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use vistopo_core::ingest::PatternParams;
use vistopo_core::model::{AutoencoderConfig, KernelSpec, PcaSelector, SvmConfig};
use vistopo_core::tdafeat::FeatureOptions;

use crate::error::{Error, Result};

/// `(key, default, description)` for every recognised key.
pub const SCHEMA: &[(&str, &str, &str)] = &[
    ("seed", "42", "master seed for data generation, K-means and CV"),
    ("subject", "synthetic", "subject name used in the report"),
    ("input", "synthetic", "`synthetic`, or a directory of time-series CSVs"),
    ("synth.channels", "30", "channels per session"),
    ("synth.timepoints", "300", "timepoints per session and class"),
    ("synth.sessions", "15", "sessions per class"),
    ("synth.noise_sigma", "1.0", "noise scale"),
    ("synth.margin", "0.1", "diagonal margin of every class precision"),
    ("synth.edges", "5,50,200", "planted edge count per class"),
    ("synth.strength", "0.5,0.5,0.5", "planted partial strength per class"),
    ("synth.precision_seed", "7", "seed placing the planted edges"),
    ("network.rel_tol", "1e-10", "pseudo-inverse singular value cutoff (relative)"),
    ("network.drop_degenerate", "true", "drop zero-variance channels instead of failing"),
    ("network.emit_intermediates", "false", "also write marginal and partial matrices"),
    ("persistence.isolated_value", "0", "filter value of isolated vertices"),
    ("persistence.oracle_bound", "512", "largest vertex count for the extended reduction"),
    ("diagram.keep_diagonal", "false", "keep zero-persistence points"),
    ("features.k", "3", "K-means clusters per diagram"),
    ("features.essential", "exclude", "`exclude` or `cap` essential points at the largest finite value"),
    ("ae.lr", "0.01", "autoencoder learning rate"),
    ("ae.momentum", "0.9", "autoencoder momentum"),
    ("ae.epochs", "2000", "autoencoder epoch cap"),
    ("ae.patience", "50", "epochs without improvement before stopping"),
    ("ae.min_improvement", "1e-8", "loss decrease that counts as improvement"),
    ("svm.c", "1", "soft-margin penalty"),
    ("svm.tol", "1e-3", "SMO stopping tolerance"),
    ("svm.gamma", "auto", "RBF gamma, `auto` = 1/(d * mean feature variance)"),
    ("svm.degree", "3", "polynomial kernel degree"),
    ("svm.coef0", "1", "polynomial kernel offset"),
    ("pca.selectors", "2,3,4,0.8,0.9,0.95", "integers keep k components, fractions a variance share"),
    ("cv.baseline_folds", "10", "folds for the raw-feature baseline"),
    ("cv.repeats", "1", "CV repetitions with derived seeds"),
    ("plot.grid", "60", "decision-region grid resolution"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            values: SCHEMA
                .iter()
                .map(|(k, v, _)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

fn split_assignment(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_assignment(line)
                .ok_or_else(|| Error::Config(format!("{origin}:{}: expected `key = value`", no + 1)))?;
            cfg.set(k, v)
                .map_err(|e| Error::Config(format!("{origin}:{}: {e}", no + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(Error::Config(format!("unknown key `{key}`"))),
        }
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let (k, v) = split_assignment(o.as_ref())
                .ok_or_else(|| Error::Config(format!("override `{}` is not `key=value`", o.as_ref())))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        &self.values[key]
    }

    fn typed<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key);
        v.parse()
            .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.get(key)
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{s}`")))
            })
            .collect()
    }

    /// Canonical text form, one `key = value` per line in key order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Canonical text restricted to keys with one of the given prefixes.
    pub fn section_text(&self, prefixes: &[&str]) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            if prefixes.iter().any(|p| k == p || k.starts_with(&format!("{p}."))) {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    pub fn settings(&self) -> Result<Settings> {
        Settings::from_config(self)
    }
}

/// Annotated default configuration file.
pub fn default_config_text() -> String {
    let mut s = String::new();
    for (k, v, doc) in SCHEMA {
        let _ = writeln!(s, "# {doc}\n{k} = {v}\n");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Essential {
    Exclude,
    Cap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSettings {
    pub channels: usize,
    pub timepoints: usize,
    pub sessions: usize,
    pub noise_sigma: f64,
    pub margin: f64,
    pub patterns: Vec<PatternParams>,
    pub precision_seed: u64,
}

/// Typed, validated view of a [`Config`].
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub subject: String,
    pub input: Option<PathBuf>,
    pub synth: SynthSettings,
    pub rel_tol: f64,
    pub drop_degenerate: bool,
    pub emit_intermediates: bool,
    pub isolated_value: f64,
    pub oracle_bound: usize,
    pub keep_diagonal: bool,
    pub k: usize,
    pub essential: Essential,
    pub autoencoder: AutoencoderConfig,
    pub svm_c: f64,
    pub svm_tol: f64,
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
    pub selectors: Vec<PcaSelector>,
    pub baseline_folds: usize,
    pub repeats: usize,
    pub plot_grid: usize,
}

fn parse_selector(s: &str) -> Result<PcaSelector> {
    let s = s.trim();
    let bad = || Error::Config(format!("`pca.selectors`: invalid entry `{s}`"));
    if s.contains('.') || s.contains('e') {
        let v: f64 = s.parse().map_err(|_| bad())?;
        if v > 0.0 && v <= 1.0 {
            return Ok(PcaSelector::Variance(v));
        }
    } else {
        let k: usize = s.parse().map_err(|_| bad())?;
        if (1..=vistopo_core::model::LATENT_DIM).contains(&k) {
            return Ok(PcaSelector::Components(k));
        }
    }
    Err(bad())
}

/// Short label of a selector: `pca2` or `var0.9`.
pub fn selector_label(s: &PcaSelector) -> String {
    match s {
        PcaSelector::Components(k) => format!("pca{k}"),
        PcaSelector::Variance(v) => format!("var{v}"),
    }
}

impl Settings {
    fn from_config(c: &Config) -> Result<Self> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("`{key}` must be positive, got {v}")))
            }
        };
        let at_least = |key: &str, v: usize, min: usize| {
            if v >= min {
                Ok(v)
            } else {
                Err(Error::Config(format!("`{key}` must be at least {min}, got {v}")))
            }
        };

        let edges: Vec<usize> = c.list("synth.edges")?;
        let strength: Vec<f64> = c.list("synth.strength")?;
        if edges.len() != strength.len() {
            return Err(Error::Config(format!(
                "`synth.edges` has {} entries but `synth.strength` has {}",
                edges.len(),
                strength.len()
            )));
        }
        let synth = SynthSettings {
            channels: at_least("synth.channels", c.typed("synth.channels")?, 2)?,
            timepoints: at_least("synth.timepoints", c.typed("synth.timepoints")?, 2)?,
            sessions: at_least("synth.sessions", c.typed("synth.sessions")?, 2)?,
            noise_sigma: positive("synth.noise_sigma", c.typed("synth.noise_sigma")?)?,
            margin: positive("synth.margin", c.typed("synth.margin")?)?,
            patterns: edges
                .into_iter()
                .zip(strength)
                .map(|(edges, strength)| PatternParams { edges, strength })
                .collect(),
            precision_seed: c.typed("synth.precision_seed")?,
        };
        let input = match c.get("input") {
            "synthetic" => None,
            "" => return Err(Error::Config("`input` is empty".into())),
            p => Some(PathBuf::from(p)),
        };
        let essential = match c.get("features.essential") {
            "exclude" => Essential::Exclude,
            "cap" => Essential::Cap,
            other => {
                return Err(Error::Config(format!(
                    "`features.essential` must be `exclude` or `cap`, got `{other}`"
                )))
            }
        };
        let gamma = match c.get("svm.gamma") {
            "auto" => None,
            _ => Some(positive("svm.gamma", c.typed("svm.gamma")?)?),
        };
        let selectors = c
            .get("pca.selectors")
            .split(',')
            .map(parse_selector)
            .collect::<Result<Vec<_>>>()?;
        let rel_tol: f64 = c.typed("network.rel_tol")?;
        if !(rel_tol >= 0.0) {
            return Err(Error::Config(format!("`network.rel_tol` must be nonnegative, got {rel_tol}")));
        }
        let isolated_value: f64 = c.typed("persistence.isolated_value")?;
        if !isolated_value.is_finite() {
            return Err(Error::Config("`persistence.isolated_value` must be finite".into()));
        }

        Ok(Settings {
            seed: c.typed("seed")?,
            subject: c.get("subject").to_string(),
            input,
            synth,
            rel_tol,
            drop_degenerate: c.typed("network.drop_degenerate")?,
            emit_intermediates: c.typed("network.emit_intermediates")?,
            isolated_value,
            oracle_bound: c.typed("persistence.oracle_bound")?,
            keep_diagonal: c.typed("diagram.keep_diagonal")?,
            k: at_least("features.k", c.typed("features.k")?, 1)?,
            essential,
            autoencoder: AutoencoderConfig {
                lr: positive("ae.lr", c.typed("ae.lr")?)?,
                momentum: c.typed("ae.momentum")?,
                epochs: c.typed("ae.epochs")?,
                patience: at_least("ae.patience", c.typed("ae.patience")?, 1)?,
                min_improvement: c.typed("ae.min_improvement")?,
                ..AutoencoderConfig::default()
            },
            svm_c: positive("svm.c", c.typed("svm.c")?)?,
            svm_tol: positive("svm.tol", c.typed("svm.tol")?)?,
            gamma,
            degree: at_least("svm.degree", c.typed("svm.degree")?, 1)? as u32,
            coef0: c.typed("svm.coef0")?,
            selectors,
            baseline_folds: at_least("cv.baseline_folds", c.typed("cv.baseline_folds")?, 2)?,
            repeats: at_least("cv.repeats", c.typed("cv.repeats")?, 1)?,
            plot_grid: at_least("plot.grid", c.typed("plot.grid")?, 2)?,
        })
    }

    pub fn feature_options(&self, cap: f64) -> FeatureOptions {
        FeatureOptions {
            k: self.k,
            keep_diagonal: self.keep_diagonal,
            essential: match self.essential {
                Essential::Exclude => vistopo_core::tdafeat::EssentialHandling::Exclude,
                Essential::Cap => vistopo_core::tdafeat::EssentialHandling::Cap(cap),
            },
        }
    }

    pub fn svm(&self, kernel: KernelSpec) -> SvmConfig {
        SvmConfig {
            kernel,
            c: self.svm_c,
            tol: self.svm_tol,
            ..SvmConfig::default()
        }
    }

    pub fn rbf(&self) -> KernelSpec {
        KernelSpec::Rbf { gamma: self.gamma }
    }

    pub fn polynomial(&self) -> KernelSpec {
        KernelSpec::Polynomial {
            degree: self.degree,
            coef0: self.coef0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let s = Config::default().settings().unwrap();
        assert_eq!(s.synth.patterns.len(), 3);
        assert_eq!(s.selectors.len(), 6);
        assert_eq!(s.k, 3);
    }

    #[test]
    fn file_and_overrides() {
        let mut c = Config::parse("# comment\nseed = 7\nsvm.c=2 # trailing\n", "t").unwrap();
        c.apply_overrides(&["seed=9"]).unwrap();
        assert_eq!(c.get("seed"), "9");
        assert_eq!(c.get("svm.c"), "2");
        assert!(matches!(Config::parse("nope = 1", "t"), Err(Error::Config(_))));
        assert!(c.apply_overrides(&["seed"]).is_err());
    }

    #[test]
    fn default_text_roundtrips() {
        assert_eq!(Config::parse(&default_config_text(), "d").unwrap(), Config::default());
    }

    #[test]
    fn bad_values() {
        for (k, v) in [("synth.sessions", "0"), ("pca.selectors", "5"), ("svm.c", "-1"), ("features.essential", "x")] {
            let mut c = Config::default();
            c.set(k, v).unwrap();
            assert!(matches!(c.settings(), Err(Error::Config(_))), "{k}={v}");
        }
    }
}
