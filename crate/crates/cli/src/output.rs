//! Artifact files. Every file opens with the artifact version, the run status
//! and the resolved config, so outputs are self-describing and re-runnable.

use std::fs;
use std::path::{Path, PathBuf};

use hawking_core::SurfaceShape;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{self, ExperimentConfig, Format};
use crate::CliError;

pub const ARTIFACT_VERSION: &str = concat!("hawking-cli ", env!("CARGO_PKG_VERSION"));

/// Column-major record table; column names come from the serialized field
/// names, with arrays split into `name_0, name_1, …`.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let name = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(&name, x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten_into(&format!("{prefix}_{i}"), x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

pub fn flatten<T: Serialize>(record: &T) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into(
        "",
        &serde_json::to_value(record).expect("record serializes"),
        &mut out,
    );
    out
}

impl Table {
    pub fn from_records<T: Serialize>(records: &[T]) -> Self {
        let mut t = Table::default();
        for r in records {
            t.push(flatten(r));
        }
        t
    }

    /// Appends a row; the first row fixes the columns.
    pub fn push(&mut self, fields: Vec<(String, String)>) {
        if self.columns.is_empty() && self.rows.is_empty() {
            self.columns = fields.iter().map(|(k, _)| k.clone()).collect();
        }
        let row = self
            .columns
            .iter()
            .map(|c| {
                fields
                    .iter()
                    .find(|(k, _)| k == c)
                    .map(|(_, v)| v.clone())
                    .unwrap_or_default()
            })
            .collect();
        self.rows.push(row);
    }
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub json: Map<String, Value>,
    pub table: Option<Table>,
    /// Extra CSV files, `(file name, table)`.
    pub extra_tables: Vec<(String, Table)>,
    pub shapes: Vec<(String, SurfaceShape)>,
    /// Lines for stdout.
    pub summary: Vec<String>,
    pub failure: Option<String>,
}

impl Outcome {
    pub fn insert<T: Serialize>(&mut self, key: &str, v: &T) {
        self.json.insert(
            key.to_string(),
            serde_json::to_value(v).expect("value serializes"),
        );
    }

    /// Inserts the fields of a struct at top level.
    pub fn extend<T: Serialize>(&mut self, v: &T) {
        if let Value::Object(m) = serde_json::to_value(v).expect("value serializes") {
            self.json.extend(m);
        }
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        self.failure = Some(match self.failure.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }
}

fn comment_header(cfg: &ExperimentConfig, failure: Option<&str>, extra: &[String]) -> String {
    let mut s = format!("# {ARTIFACT_VERSION}\n");
    match failure {
        Some(msg) => s.push_str(&format!("# status: failed: {}\n", msg.replace('\n', " "))),
        None => s.push_str("# status: ok\n"),
    }
    for line in extra {
        s.push_str(&format!("# {line}\n"));
    }
    s.push_str("# config:\n");
    for line in config::to_toml(cfg).lines() {
        s.push_str(format!("# {line}").trim_end());
        s.push('\n');
    }
    s
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn csv_text(t: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&t.columns).map_err(io)?;
    for r in &t.rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Writes the requested formats plus `config.toml`; returns the paths written.
pub fn write_outcome(
    cfg: &ExperimentConfig,
    command: &str,
    out: &Outcome,
) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let failure = out.failure.as_deref();
    let mut written = Vec::new();

    let path = dir.join("config.toml");
    write(
        &path,
        format!("# {ARTIFACT_VERSION}\n{}", config::to_toml(cfg)).as_bytes(),
    )?;
    written.push(path);

    if cfg.output.wants(Format::Json) {
        let mut doc = Map::new();
        doc.insert("artifact_version".into(), Value::from(ARTIFACT_VERSION));
        doc.insert("command".into(), Value::from(command));
        doc.insert(
            "status".into(),
            Value::from(if failure.is_some() { "failed" } else { "ok" }),
        );
        if let Some(msg) = failure {
            doc.insert("error".into(), Value::from(msg));
        }
        doc.insert(
            "config".into(),
            serde_json::to_value(cfg).expect("config serializes"),
        );
        for (k, v) in &out.json {
            doc.insert(k.clone(), v.clone());
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json serializes");
        text.push('\n');
        let path = dir.join("report.json");
        write(&path, text.as_bytes())?;
        written.push(path);
    }

    if cfg.output.wants(Format::Csv) {
        let tables = out
            .table
            .iter()
            .map(|t| ("run.csv".to_string(), t))
            .chain(out.extra_tables.iter().map(|(n, t)| (n.clone(), t)));
        for (name, t) in tables {
            let doc = format!("columns: {}", t.columns.join(", "));
            let text =
                comment_header(cfg, failure, &[format!("command: {command}"), doc]) + &csv_text(t)?;
            let path = dir.join(name);
            write(&path, text.as_bytes())?;
            written.push(path);
        }
    }

    if cfg.output.wants(Format::Shape) {
        for (name, shape) in &out.shapes {
            let text =
                comment_header(cfg, failure, &[format!("command: {command}")]) + &shape.to_text();
            let path = dir.join(name);
            write(&path, text.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}
