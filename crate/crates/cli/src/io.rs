use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// Reads and parses the input document; no path or `-` means stdin.
pub fn read_json<T: DeserializeOwned>(path: Option<&Path>) -> Result<T, CliError> {
    let (name, text) = match path {
        Some(p) if p != Path::new("-") => {
            (p.display().to_string(), std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?)
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
            ("stdin".to_string(), s)
        }
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{name}: {e}")))
}

#[derive(Deserialize)]
struct ComplexVec(#[serde(with = "pnlab::json::vec")] Vec<Complex64>);

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexScalar {
    Real(f64),
    Complex {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

/// A list of complex numbers given as JSON, e.g. `[1, 2]` or
/// `[{"re": 2.5, "im": 1}]`.
pub fn parse_complex_list(flag: &str, text: &str) -> Result<Vec<Complex64>, CliError> {
    serde_json::from_str::<ComplexVec>(text).map(|v| v.0).map_err(|e| CliError::Input(format!("--{flag}: {e}")))
}

pub fn parse_complex(flag: &str, text: &str) -> Result<Complex64, CliError> {
    match serde_json::from_str::<ComplexScalar>(text) {
        Ok(ComplexScalar::Real(x)) => Ok(Complex64::new(x, 0.0)),
        Ok(ComplexScalar::Complex { re, im }) => Ok(Complex64::new(re, im)),
        Err(e) => Err(CliError::Input(format!("--{flag}: {e}"))),
    }
}

pub fn parse_list<T: DeserializeOwned>(flag: &str, text: &str) -> Result<Vec<T>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("--{flag}: {e}")))
}

pub fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// `{"schema", "command", "params", ...result}`; non-object results are
/// stored under `"result"`.
pub fn report(command: &str, params: Value, result: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("command".into(), json!(command));
    out.insert("params".into(), params);
    match result {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

pub fn write_report(report: &Value, output: Option<&PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("JSON values serialize");
    text.push('\n');
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

/// Plot-ready table: a header row and one record per row.
pub struct Series {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    pub fn new(header: &[&'static str]) -> Self {
        Series { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let err = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}
