//! Report envelope and csv/json rendering.

use serde_json::{Map, Value};

use crate::CliError;

pub type Record = Map<String, Value>;

/// What a command hands back: top-level result fields, an optional table
/// for csv output, and any guarantees that failed.
#[derive(Debug, Default)]
pub struct Output {
    pub result: Record,
    pub rows: Option<Vec<Record>>,
    pub violations: Vec<String>,
}

impl Output {
    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.result.insert(key.to_string(), value.into());
    }

    /// A real number together with the expression it evaluates.
    pub fn set_real(&mut self, key: &str, value: f64, formula: &str) {
        self.set(key, value);
        self.set(&format!("{key}_formula"), formula);
    }

    pub fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(message());
        }
    }
}

/// Integers beyond `u64` become decimal strings.
pub fn int(v: u128) -> Value {
    match u64::try_from(v) {
        Ok(x) => Value::from(x),
        Err(_) => Value::from(v.to_string()),
    }
}

pub struct Envelope {
    pub command: String,
    pub flags: Record,
    pub seed: u64,
    pub elapsed_ms: u64,
}

impl Envelope {
    fn meta(&self) -> Record {
        let mut m = Record::new();
        m.insert("command".into(), self.command.clone().into());
        m.insert("flags".into(), Value::Object(self.flags.clone()));
        m.insert("seed".into(), self.seed.into());
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        m.insert("elapsed_ms".into(), self.elapsed_ms.into());
        m
    }

    pub fn to_json(&self, out: &Output) -> Result<String, CliError> {
        let mut doc = self.meta();
        for (k, v) in &out.result {
            doc.insert(k.clone(), v.clone());
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
        text.push('\n');
        Ok(text)
    }

    pub fn to_csv(&self, out: &Output) -> Result<String, CliError> {
        let rows = match &out.rows {
            Some(rows) => rows.clone(),
            None => vec![out.result.clone()],
        };
        let meta = self.meta();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = meta.keys().cloned().collect();
        if let Some(first) = rows.first() {
            header.extend(first.keys().cloned());
        }
        w.write_record(&header)?;
        for row in &rows {
            let cells: Vec<String> = meta.values().chain(row.values()).map(cell).collect();
            w.write_record(&cells)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(_) | Value::Number(_) => v.to_string(),
        Value::Array(_) | Value::Object(_) => v.to_string(),
    }
}
