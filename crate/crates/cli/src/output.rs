//! Rendering records as JSON or CSV.
//!
//! CSV is derived from the JSON form: a record with a `rows` array yields one
//! line per row, any other record a single line. Nested objects become
//! dotted column names, arrays of scalars are joined with `;` and arrays of
//! objects are embedded as compact JSON.

use serde::Serialize;
use serde_json::Value;

use crate::records::{Envelope, SCHEMA};
use crate::{CliError, CliResult, Format};

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

pub fn render<T: Serialize>(format: Format, command: &str, seed: u64, body: T, warnings: Vec<String>) -> CliResult<String> {
    match format {
        Format::Json => {
            let env = Envelope { schema: SCHEMA.to_string(), command: command.to_string(), seed, body, warnings };
            let mut s = serde_json::to_string_pretty(&env).map_err(internal)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            to_csv(&serde_json::to_value(&body).map_err(internal)?)
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                match child {
                    Value::Object(_) => flatten(&key(k), child, out),
                    _ => out.push((key(k), cell(child))),
                }
            }
        }
        other => out.push((prefix.to_string(), cell(other))),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            items.iter().map(scalar).collect::<Vec<_>>().join(";")
        }
        Value::Array(_) | Value::Object(_) => v.to_string(),
        other => scalar(other),
    }
}

fn to_csv(body: &Value) -> CliResult<String> {
    let rows: Vec<&Value> = match body.get("rows") {
        Some(Value::Array(rows)) => rows.iter().collect(),
        _ => vec![body],
    };
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Option<Vec<String>> = None;
    for row in rows {
        let mut fields = Vec::new();
        flatten("", row, &mut fields);
        let names: Vec<String> = fields.iter().map(|(k, _)| k.clone()).collect();
        match &header {
            None => {
                writer.write_record(&names).map_err(internal)?;
                header = Some(names);
            }
            Some(h) if *h != names => return Err(CliError::Internal("CSV rows disagree on their columns".into())),
            Some(_) => {}
        }
        writer.write_record(fields.iter().map(|(_, v)| v)).map_err(internal)?;
    }
    let bytes = writer.into_inner().map_err(internal)?;
    String::from_utf8(bytes).map_err(internal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn single_record_flattens() {
        let v = json!({"a": 1.5, "b": {"c": true, "d": null}, "e": [1, 2], "f": "x,y"});
        assert_eq!(to_csv(&v).unwrap(), "a,b.c,b.d,e,f\n1.5,true,,1;2,\"x,y\"\n");
    }

    #[test]
    fn rows_become_lines() {
        let v = json!({"rows": [{"x": 1, "y": "inf"}, {"x": 2, "y": 0.5}]});
        assert_eq!(to_csv(&v).unwrap(), "x,y\n1,inf\n2,0.5\n");
    }
}
