//! Deterministic file output: CSV with 12 significant digits and versioned
//! JSON documents. No timestamps or machine state enter the artifacts, so
//! identical configurations produce byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::Failure;

/// 12 significant digits, scientific notation.
pub fn fmt_sig(value: f64) -> String {
    format!("{value:.11e}")
}

/// Optional value; empty field when undefined.
pub fn fmt_opt(value: Option<f64>) -> String {
    value.map(fmt_sig).unwrap_or_default()
}

pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn from_path(path: &Option<PathBuf>) -> Self {
        match path {
            Some(path) => Sink::File(path.clone()),
            None => Sink::Stdout,
        }
    }

    pub fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match self {
            Sink::Stdout => Box::new(io::stdout().lock()),
            Sink::File(path) => Box::new(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            Sink::Stdout => None,
            Sink::File(path) => Some(path),
        }
    }

    /// Path with an extra extension appended, for sidecar files.
    pub fn sibling(&self, suffix: &str) -> Option<PathBuf> {
        self.path().map(|p| {
            let mut name = p.as_os_str().to_owned();
            name.push(suffix);
            PathBuf::from(name)
        })
    }
}

pub fn write_csv(
    sink: &Sink,
    header: &str,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), Failure> {
    let mut out = sink.writer()?;
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json(sink: &Sink, value: &serde_json::Value) -> Result<(), Failure> {
    let mut out = sink.writer()?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Failure::numeric(format!("json serialization failed: {e}")))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Provenance sidecar written only on request (`--meta`), never into the
/// data file itself.
pub fn write_meta_sidecar(
    sink: &Sink,
    command: &str,
    config: serde_json::Value,
) -> Result<(), Failure> {
    let Some(path) = sink.sibling(".meta.json") else {
        eprintln!("qfel: --meta ignored for stdout output");
        return Ok(());
    };
    let document = serde_json::json!({
        "schema_version": 1,
        "tool": "qfel",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    });
    write_json(&Sink::File(path), &document)
}
