//! Graph JSON, tab-separated function and field files, and the header that
//! every output carries.
//!
//! TSV files start with `#` comment lines: a format line, an optional
//! one-line JSON config echo, and the column names. Numbers are written with
//! the shortest representation that round-trips, so identical runs produce
//! identical bytes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dirichlet::DirichletSpace;
use crate::error::{Error, Result};
use crate::extension::{ExtensionField, Provenance};

pub const FORMAT_VERSION: u32 = 1;

const FORMAT_PREFIX: &str = "# fraclab format_version=";
const CONFIG_PREFIX: &str = "# config ";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub w: f64,
}

/// On-disk graph: `{"vertices":[{"id","mu"}], "edges":[{"u","v","w"}], "metric"?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
}

impl GraphFile {
    /// Snapshot of a space; the metric is written only when asked for, since
    /// the loader recomputes hop distances by default.
    pub fn from_space(space: &DirichletSpace, with_metric: bool) -> Self {
        let ids = space.ids();
        let n = space.len();
        Self {
            vertices: ids
                .iter()
                .zip(space.measure())
                .map(|(id, &mu)| VertexRecord { id: id.clone(), mu })
                .collect(),
            edges: space
                .edges()
                .into_iter()
                .map(|(u, v, w)| EdgeRecord {
                    u: ids[u].clone(),
                    v: ids[v].clone(),
                    w,
                })
                .collect(),
            metric: with_metric.then(|| (0..n).map(|i| (0..n).map(|j| space.dist(i, j)).collect()).collect()),
        }
    }

    pub fn into_space(self) -> Result<DirichletSpace> {
        DirichletSpace::build(
            self.vertices.into_iter().map(|v| (v.id, v.mu)).collect(),
            self.edges.into_iter().map(|e| (e.u, e.v, e.w)).collect(),
            self.metric,
        )
    }
}

pub fn parse_space(text: &str) -> Result<DirichletSpace> {
    serde_json::from_str::<GraphFile>(text)?.into_space()
}

pub fn read_space(path: &Path) -> Result<DirichletSpace> {
    parse_space(&fs::read_to_string(path)?)
}

pub fn space_json(space: &DirichletSpace, with_metric: bool) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GraphFile::from_space(
        space,
        with_metric,
    ))?)
}

/// Named standard graph: `ringN`, `pathN`, `gridN` / `gridNxM`, `torusN` /
/// `torusNxM`, all with unit measure and conductances.
pub fn builtin_space(name: &str) -> Result<DirichletSpace> {
    let bad = || {
        Error::Parse(format!(
            "unknown built-in graph {name:?}; expected ringN, pathN, gridNxM or torusNxM"
        ))
    };
    let split = name.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?;
    let (kind, dims) = name.split_at(split);
    let sizes: Vec<usize> = dims
        .split('x')
        .map(|d| d.parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match (kind, sizes.as_slice()) {
        ("ring", [n]) => DirichletSpace::ring(*n),
        ("path", [n]) => DirichletSpace::path(*n),
        ("grid", [n]) => DirichletSpace::grid(*n, *n),
        ("grid", [a, b]) => DirichletSpace::grid(*a, *b),
        ("torus", [n]) => DirichletSpace::torus(*n, *n),
        ("torus", [a, b]) => DirichletSpace::torus(*a, *b),
        _ => Err(bad()),
    }
}

/// Shortest round-trip decimal form; scientific outside `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: {field:?} is not a number")))
}

/// A parsed TSV file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TsvDocument {
    pub config: Option<Value>,
    pub columns: Vec<String>,
    /// `(line number, fields)`.
    pub rows: Vec<(usize, Vec<String>)>,
}

impl TsvDocument {
    pub fn new(config: Option<Value>, columns: &[&str]) -> Self {
        Self {
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, fields: Vec<String>) {
        let line = self.rows.len() + 1;
        self.rows.push((line, fields));
    }

    /// Comment lines may appear anywhere; the last plain `#` line before the
    /// first data row names the columns.
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with(FORMAT_PREFIX) {
                continue;
            }
            if let Some(json) = line.strip_prefix(CONFIG_PREFIX) {
                doc.config = Some(serde_json::from_str(json)?);
            } else if let Some(rest) = line.strip_prefix('#') {
                if doc.rows.is_empty() {
                    doc.columns = rest.trim().split('\t').map(|c| c.trim().to_string()).collect();
                }
            } else {
                let fields: Vec<String> = line.split('\t').map(|f| f.trim().to_string()).collect();
                if !doc.columns.is_empty() && fields.len() != doc.columns.len() {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} fields, found {}",
                        k + 1,
                        doc.columns.len(),
                        fields.len()
                    )));
                }
                doc.rows.push((k + 1, fields));
            }
        }
        Ok(doc)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{FORMAT_PREFIX}{FORMAT_VERSION}\n");
        if let Some(cfg) = &self.config {
            let _ = writeln!(out, "{CONFIG_PREFIX}{cfg}");
        }
        if !self.columns.is_empty() {
            let _ = writeln!(out, "# {}", self.columns.join("\t"));
        }
        for (_, row) in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Numeric column `k` of every row.
    pub fn column(&self, k: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|(line, fields)| {
                let f = fields
                    .get(k)
                    .ok_or_else(|| Error::Parse(format!("line {line}: missing column {}", k + 1)))?;
                parse_number(f, *line)
            })
            .collect()
    }
}

/// Table with one label column followed by numeric columns.
pub fn numeric_table(
    config: Option<Value>,
    columns: &[&str],
    rows: impl IntoIterator<Item = (String, Vec<f64>)>,
) -> String {
    let mut doc = TsvDocument::new(config, columns);
    for (label, values) in rows {
        let mut fields = vec![label];
        fields.extend(values.into_iter().map(format_number));
        doc.push(fields);
    }
    doc.render()
}

/// Function TSV with columns `vertex_id`, `value`.
pub fn function_tsv(space: &DirichletSpace, values: &[f64], config: Option<Value>) -> String {
    numeric_table(
        config,
        &["vertex_id", "value"],
        space.ids().iter().zip(values).map(|(id, &v)| (id.clone(), vec![v])),
    )
}

/// Reads a `(vertex_id, value)` table that lists every vertex exactly once.
pub fn parse_function(text: &str, space: &DirichletSpace) -> Result<Vec<f64>> {
    let doc = TsvDocument::parse(text)?;
    let mut values = vec![f64::NAN; space.len()];
    let mut seen = vec![false; space.len()];
    for (line, fields) in &doc.rows {
        if fields.len() != 2 {
            return Err(Error::Parse(format!("line {line}: expected vertex_id and value")));
        }
        let x = space.index_of(&fields[0])?;
        if std::mem::replace(&mut seen[x], true) {
            return Err(Error::DuplicateVertex(fields[0].clone()));
        }
        values[x] = parse_number(&fields[1], *line)?;
    }
    if let Some(x) = seen.iter().position(|s| !s) {
        return Err(Error::Parse(format!("no value for vertex {}", space.ids()[x])));
    }
    Ok(values)
}

pub fn read_function(path: &Path, space: &DirichletSpace) -> Result<Vec<f64>> {
    parse_function(&fs::read_to_string(path)?, space)
}

/// Field TSV with columns `vertex_id`, `y`, `U`, level by level.
pub fn field_tsv(space: &DirichletSpace, field: &ExtensionField, config: Option<Value>) -> String {
    let mut doc = TsvDocument::new(config, &["vertex_id", "y", "U"]);
    for (j, &y) in field.ys.iter().enumerate() {
        for (x, id) in space.ids().iter().enumerate() {
            doc.push(vec![id.clone(), format_number(y), format_number(field.get(x, j))]);
        }
    }
    doc.render()
}

/// Reads a field table. Every vertex must appear at every height; `s` comes
/// from the argument or, failing that, from the config echo.
pub fn parse_field(text: &str, space: &DirichletSpace, s: Option<f64>) -> Result<ExtensionField> {
    let doc = TsvDocument::parse(text)?;
    let s = match s.or_else(|| doc.config.as_ref().and_then(|c| c.get("s")).and_then(Value::as_f64)) {
        Some(s) => s,
        None => {
            return Err(Error::InvalidInput(
                "field file has no s in its config; pass it explicitly".into(),
            ))
        }
    };
    let n = space.len();
    let mut levels: Vec<f64> = Vec::new();
    let mut slot: HashMap<u64, usize> = HashMap::new();
    let mut entries = Vec::with_capacity(doc.rows.len());
    for (line, fields) in &doc.rows {
        if fields.len() != 3 {
            return Err(Error::Parse(format!("line {line}: expected vertex_id, y and U")));
        }
        let x = space.index_of(&fields[0])?;
        let y = parse_number(&fields[1], *line)?;
        let u = parse_number(&fields[2], *line)?;
        let j = *slot.entry(y.to_bits()).or_insert_with(|| {
            levels.push(y);
            levels.len() - 1
        });
        entries.push((j, x, u));
    }
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[a].total_cmp(&levels[b]));
    let mut rank = vec![0; levels.len()];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    let mut values = vec![f64::NAN; n * levels.len()];
    for (j, x, u) in entries {
        values[rank[j] * n + x] = u;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Parse(
            "field table does not cover every vertex at every height".into(),
        ));
    }
    let ys = order.iter().map(|&j| levels[j]).collect();
    ExtensionField::new(s, ys, n, values, Provenance::PdeSolve)
}
