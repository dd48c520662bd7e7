//! Report records and their JSON-lines / CSV encodings.
//!
//! Both encodings are byte-stable: map keys are sorted, integers are written
//! without quotes or exponents, and nothing time-dependent is emitted unless
//! the caller puts it in `elapsed_ms`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::ser::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// A numeric extra. Floats always render with a `.`, an exponent, `inf`
/// or `NaN`, which keeps them distinct from integers in CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i128),
    Float(f64),
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Value::Int(i) => s.serialize_i128(i),
            Value::Float(f) => s.serialize_f64(f),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl FromStr for Value {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(i) = s.parse::<i128>() {
            return Ok(Value::Int(i));
        }
        s.parse::<f64>()
            .map(Value::Float)
            .map_err(|_| invalid(format!("'{s}' is not a number")))
    }
}

impl From<i128> for Value {
    fn from(v: i128) -> Self {
        Value::Int(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v.into())
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

/// One row of output. Fields are declared in sorted order so the JSON
/// object keys come out sorted.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CountRecord {
    pub command: String,
    pub count: u64,
    pub elapsed_ms: u64,
    pub extras: BTreeMap<String, Value>,
    pub parameters: BTreeMap<String, String>,
}

impl CountRecord {
    pub fn new(command: impl Into<String>, count: u64) -> Self {
        CountRecord {
            command: command.into(),
            count,
            elapsed_ms: 0,
            extras: BTreeMap::new(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn extra(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.extras.insert(key.to_string(), value.into());
        self
    }

    pub fn with_params(mut self, params: &BTreeMap<String, String>) -> Self {
        self.parameters
            .extend(params.iter().map(|(k, v)| (k.clone(), v.clone())));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    JsonLines,
    Csv,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" | "jsonl" | "json-lines" => Ok(Format::JsonLines),
            "csv" => Ok(Format::Csv),
            other => Err(invalid(format!(
                "unknown format '{other}' (expected json-lines or csv)"
            ))),
        }
    }
}

const CSV_HEADER: [&str; 5] = ["command", "count", "elapsed_ms", "extras", "parameters"];

fn encode_map<V: fmt::Display>(m: &BTreeMap<String, V>) -> String {
    m.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn decode_pairs(s: &str) -> Result<Vec<(String, String)>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| invalid(format!("malformed key=value pair '{kv}'")))
        })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    invalid(format!("csv: {e}"))
}

/// Encodes records in the given format.
pub fn render(records: &[CountRecord], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::JsonLines => {
            let mut out = Vec::new();
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(|e| invalid(format!("json: {e}")))?;
                out.push(b'\n');
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::CRLF)
                .from_writer(Vec::new());
            w.write_record(CSV_HEADER).map_err(csv_error)?;
            for r in records {
                w.write_record([
                    r.command.clone(),
                    r.count.to_string(),
                    r.elapsed_ms.to_string(),
                    encode_map(&r.extras),
                    encode_map(&r.parameters),
                ])
                .map_err(csv_error)?;
            }
            w.into_inner().map_err(|e| invalid(format!("csv: {e}")))
        }
    }
}

/// Parses CSV produced by [`render`].
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(invalid("unexpected csv header"));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let num = |i: usize| {
            field(i)
                .parse::<u64>()
                .map_err(|_| invalid(format!("'{}' is not a count", field(i))))
        };
        let mut extras = BTreeMap::new();
        for (k, v) in decode_pairs(field(3))? {
            extras.insert(k, v.parse::<Value>()?);
        }
        out.push(CountRecord {
            command: field(0).to_string(),
            count: num(1)?,
            elapsed_ms: num(2)?,
            extras,
            parameters: decode_pairs(field(4))?.into_iter().collect(),
        });
    }
    Ok(out)
}

/// Writes records to `dest`, or standard output when `dest` is `None`.
pub fn write_report(records: &[CountRecord], format: Format, dest: Option<&Path>) -> Result<()> {
    let bytes = render(records, format)?;
    let io_err = |e: io::Error| invalid(format!("cannot write report: {e}"));
    match dest {
        Some(path) => {
            let mut f = File::create(path).map_err(io_err)?;
            f.write_all(&bytes).map_err(io_err)
        }
        None => io::stdout().lock().write_all(&bytes).map_err(io_err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CountRecord {
        CountRecord::new("twist-count", 42)
            .param("e", "0,1,2")
            .param("B", 10)
            .extra("beta", 1.25)
            .extra("n_cutoff", 2000u64)
    }

    #[test]
    fn empty_csv_is_header_only() {
        let out = render(&[], Format::Csv).unwrap();
        assert_eq!(out, b"command,count,elapsed_ms,extras,parameters\r\n");
    }

    #[test]
    fn comma_fields_are_quoted() {
        let out = String::from_utf8(render(&[sample()], Format::Csv).unwrap()).unwrap();
        assert!(out.contains("\"B=10;e=0,1,2\""), "{out}");
    }

    #[test]
    fn json_keys_sorted_and_stable() {
        let a = render(&[sample()], Format::JsonLines).unwrap();
        let b = render(&[sample()], Format::JsonLines).unwrap();
        assert_eq!(a, b);
        let s = String::from_utf8(a).unwrap();
        assert_eq!(
            s,
            "{\"command\":\"twist-count\",\"count\":42,\"elapsed_ms\":0,\
             \"extras\":{\"beta\":1.25,\"n_cutoff\":2000},\
             \"parameters\":{\"B\":\"10\",\"e\":\"0,1,2\"}}\n"
        );
    }

    #[test]
    fn csv_roundtrip() {
        let recs = vec![
            sample(),
            CountRecord::new("beta", 0)
                .extra("beta", 1.0)
                .extra("y", -(1i128 << 100)),
        ];
        let bytes = render(&recs, Format::Csv).unwrap();
        assert_eq!(parse_csv(&bytes).unwrap(), recs);
    }

    #[test]
    fn unwritable_destination() {
        let err = write_report(
            &[],
            Format::Csv,
            Some(Path::new("/nonexistent/dir/out.csv")),
        );
        assert!(err.is_err());
    }
}
