use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Round to 12 significant digits. Non-finite values pass through.
pub fn sig12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

pub fn sig12_opt(v: Option<f64>) -> Option<f64> {
    v.map(sig12)
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub tolerances: Map<String, Value>,
}

impl Meta {
    pub fn new(command: &'static str, tolerances: &[(&str, f64)]) -> Self {
        Meta {
            tool: "ncx2",
            version: env!("CARGO_PKG_VERSION"),
            command,
            tolerances: tolerances
                .iter()
                .map(|&(k, v)| (k.to_string(), Value::from(v)))
                .collect(),
        }
    }
}

/// What a command produced: a single record, or a table of rows with shared
/// top-level fields.
pub enum Payload<R: Serialize> {
    Record(R),
    Table {
        fields: Map<String, Value>,
        rows: Vec<R>,
    },
}

pub fn emit<R: Serialize>(
    out: &mut impl Write,
    format: Format,
    meta: Meta,
    payload: Payload<R>,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let mut object = Map::new();
            object.insert("meta".into(), serde_json::to_value(meta)?);
            match payload {
                Payload::Record(record) => match serde_json::to_value(record)? {
                    Value::Object(fields) => object.extend(fields),
                    other => {
                        object.insert("result".into(), other);
                    }
                },
                Payload::Table { fields, rows } => {
                    object.extend(fields);
                    object.insert("rows".into(), serde_json::to_value(rows)?);
                }
            }
            serde_json::to_writer_pretty(&mut *out, &Value::Object(object))?;
            writeln!(out)?;
        }
        Format::Csv => {
            let rows = match payload {
                Payload::Record(record) => vec![record],
                Payload::Table { rows, .. } => rows,
            };
            let mut writer = csv::Writer::from_writer(&mut *out);
            for row in rows {
                writer.serialize(row)?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}
