//! Reports: a deterministic body plus separately kept timing.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

impl InputHash {
    pub fn of(path: &str, bytes: &[u8]) -> InputHash {
        InputHash { path: path.to_string(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<InputHash>,
    pub bounds: BTreeMap<String, Value>,
    pub holds: bool,
    pub result: Value,
}

#[derive(Serialize)]
struct Timing {
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct Envelope<'a> {
    report: &'a Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Timing>,
}

pub fn render_json(report: &Report, elapsed_ms: Option<f64>) -> String {
    let env = Envelope { report, timing: elapsed_ms.map(|elapsed_ms| Timing { elapsed_ms }) };
    let mut out = serde_json::to_string_pretty(&env).expect("reports serialize");
    out.push('\n');
    out
}

pub fn render_text(report: &Report, elapsed_ms: Option<f64>) -> String {
    let mut out = String::new();
    let verdict = if report.holds { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "{} {verdict}", report.command);
    for input in &report.inputs {
        let _ = writeln!(out, "input {} sha256:{}", input.path, input.sha256);
    }
    for (k, v) in &report.bounds {
        let _ = writeln!(out, "bound {k} = {v}");
    }
    write_value(&mut out, &report.result, 0);
    if let Some(ms) = elapsed_ms {
        let _ = writeln!(out, "elapsed {ms:.1} ms");
    }
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| scalar(x).is_some() && !x.is_array()) => {
            Some(format!("[{}]", a.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        write_value(out, x, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        write_value(out, x, indent + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}
