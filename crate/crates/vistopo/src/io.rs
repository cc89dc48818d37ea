//! Readers and writers for every on-disk format.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vistopo_core::corrnet::{CorrelationKind, CorrelationMatrix, Edge, VisualNetwork};
use vistopo_core::ingest::TimeSeriesMatrix;
use vistopo_core::persistence::{PersistenceDiagram, PersistencePoint};
use vistopo_core::tdafeat::FEATURE_NAMES;
use vistopo_core::Matrix;

use crate::error::{CoreContext, Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents`, creating parent directories.
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Files in `dir` with the given extension, sorted by name.
pub fn list_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x == extension) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Time-series CSV: one row per channel, channel id first.
pub fn parse_timeseries_csv(text: &str, path: &Path) -> Result<(Matrix, Vec<String>)> {
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let id = cells.next().unwrap_or("").trim().to_string();
        let values = cells
            .enumerate()
            .map(|(col, c)| {
                c.trim().parse::<f64>().map_err(|_| {
                    Error::parse(path, format!("row {}, column {}: `{}` is not a number", no + 1, col + 2, c.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if values.len() != first.len() {
                return Err(Error::parse(
                    path,
                    format!("row {} has {} values, expected {}", no + 1, values.len(), first.len()),
                ));
            }
        }
        ids.push(id);
        rows.push(values);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::parse(path, "no data rows"));
    }
    Ok((Matrix::from_rows(&rows), ids))
}

pub fn format_timeseries_csv(series: &TimeSeriesMatrix) -> String {
    let mut s = String::new();
    for (i, id) in series.channel_ids().iter().enumerate() {
        s.push_str(id);
        for v in series.values().row(i) {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

pub fn parse_labels(text: &str) -> Vec<String> {
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if line.trim().is_empty() {
        return Vec::new();
    }
    line.split(',').map(|s| s.trim().to_string()).collect()
}

/// Companion label file of a time-series CSV.
pub fn labels_path(csv: &Path) -> PathBuf {
    csv.with_extension("labels")
}

/// Reads a CSV and, if present, its `.labels` file.
pub fn read_timeseries(path: &Path) -> Result<TimeSeriesMatrix> {
    let (values, ids) = parse_timeseries_csv(&read_text(path)?, path)?;
    let lp = labels_path(path);
    let labels = if lp.exists() {
        Some(parse_labels(&read_text(&lp)?))
    } else {
        None
    };
    TimeSeriesMatrix::new(values, ids, labels).context(|| path.display().to_string())
}

pub fn write_timeseries(path: &Path, series: &TimeSeriesMatrix) -> Result<()> {
    write_file(path, format_timeseries_csv(series))?;
    if let Some(labels) = series.labels() {
        write_file(&labels_path(path), format!("{}\n", labels.join(",")))?;
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(path, e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct CorrelationJson {
    kind: String,
    n: usize,
    values: Vec<Vec<f64>>,
}

pub fn correlation_json(c: &CorrelationMatrix) -> String {
    to_json(&CorrelationJson {
        kind: c.kind.as_str().to_string(),
        n: c.n(),
        values: c.values.iter_rows().map(|r| r.to_vec()).collect(),
    })
}

pub fn parse_correlation_json(text: &str, path: &Path) -> Result<CorrelationMatrix> {
    let j: CorrelationJson = from_json(text, path)?;
    let kind = match j.kind.as_str() {
        "marginal" => CorrelationKind::Marginal,
        "partial" => CorrelationKind::Partial,
        other => return Err(Error::parse(path, format!("field `kind`: unknown kind `{other}`"))),
    };
    if j.values.len() != j.n || j.values.iter().any(|r| r.len() != j.n) {
        return Err(Error::parse(path, format!("field `values`: expected {0}×{0}", j.n)));
    }
    Ok(CorrelationMatrix {
        kind,
        values: Matrix::from_rows(&j.values),
    })
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    vertices: Vec<String>,
    edges: Vec<(usize, usize, f64)>,
}

pub fn network_json(net: &VisualNetwork) -> String {
    to_json(&NetworkJson {
        vertices: net.vertices().to_vec(),
        edges: net.edges().iter().map(|e| (e.i, e.j, e.weight)).collect(),
    })
}

pub fn parse_network_json(text: &str, path: &Path) -> Result<VisualNetwork> {
    let j: NetworkJson = from_json(text, path)?;
    let n = j.vertices.len();
    if let Some((k, e)) = j.edges.iter().enumerate().find(|(_, e)| e.0 >= n || e.1 >= n) {
        return Err(Error::parse(
            path,
            format!("field `edges[{k}]`: vertex index out of range ({}, {}) for {n} vertices", e.0, e.1),
        ));
    }
    let edges = j
        .edges
        .into_iter()
        .map(|(i, j, weight)| Edge { i, j, weight })
        .collect();
    VisualNetwork::new(j.vertices, edges).context(|| format!("{}: field `edges`", path.display()))
}

pub fn read_network(path: &Path) -> Result<VisualNetwork> {
    parse_network_json(&read_text(path)?, path)
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    dim0: Vec<(f64, Option<f64>)>,
    dim1: Vec<(f64, f64)>,
}

/// Diagram JSON; essential deaths are written as `null`.
pub fn diagram_json(d: &PersistenceDiagram) -> String {
    to_json(&DiagramJson {
        dim0: d
            .dim0
            .iter()
            .map(|p| (p.birth, (!p.essential).then_some(p.death)))
            .collect(),
        dim1: d.dim1.iter().map(|p| (p.birth, p.death)).collect(),
    })
}

pub fn parse_diagram_json(text: &str, path: &Path) -> Result<PersistenceDiagram> {
    let j: DiagramJson = from_json(text, path)?;
    let finite = |v: f64, field: &str| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::parse(path, format!("field `{field}`: non-finite value")))
        }
    };
    let mut dim0 = Vec::with_capacity(j.dim0.len());
    for (b, d) in j.dim0 {
        let b = finite(b, "dim0")?;
        dim0.push(match d {
            Some(d) => PersistencePoint::ordinary(b, finite(d, "dim0")?),
            None => PersistencePoint::essential(b),
        });
    }
    let mut dim1 = Vec::with_capacity(j.dim1.len());
    for (b, d) in j.dim1 {
        dim1.push(PersistencePoint::extended(finite(b, "dim1")?, finite(d, "dim1")?));
    }
    Ok(PersistenceDiagram { dim0, dim1 })
}

pub fn read_diagram(path: &Path) -> Result<PersistenceDiagram> {
    parse_diagram_json(&read_text(path)?, path)
}

/// One row of `features.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub network_id: String,
    pub class: String,
    pub values: [f64; 12],
}

pub fn features_header() -> String {
    let mut h = String::from("network_id,class");
    for name in FEATURE_NAMES {
        h.push(',');
        h.push_str(name);
    }
    h
}

pub fn features_csv(rows: &[FeatureRow]) -> String {
    let mut s = features_header();
    s.push('\n');
    for r in rows {
        s.push_str(&r.network_id);
        s.push(',');
        s.push_str(&r.class);
        for v in r.values {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

pub fn parse_features_csv(text: &str, path: &Path) -> Result<Vec<FeatureRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == features_header() => {}
        _ => return Err(Error::parse(path, "header does not match the canonical feature columns")),
    }
    let mut rows = Vec::new();
    for (no, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 14 {
            return Err(Error::parse(path, format!("row {} has {} cells, expected 14", no + 1, cells.len())));
        }
        let mut values = [0.0; 12];
        for (k, v) in values.iter_mut().enumerate() {
            *v = cells[k + 2].trim().parse().map_err(|_| {
                Error::parse(path, format!("row {}, field `{}`: `{}` is not a number", no + 1, FEATURE_NAMES[k], cells[k + 2]))
            })?;
        }
        rows.push(FeatureRow {
            network_id: cells[0].to_string(),
            class: cells[1].to_string(),
            values,
        });
    }
    Ok(rows)
}
