use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::args::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flat rows with a fixed column order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// What a command produced, in both shapes.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub json: Value,
    pub table: Table,
}

pub fn emit(artifact: &Artifact, format: Format, out: Option<&Path>) -> Result<(), Box<dyn std::error::Error>> {
    let bytes = match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(&artifact.json)?;
            s.push(b'\n');
            s
        }
        Format::Csv => artifact.table.to_csv()?,
    };
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}
