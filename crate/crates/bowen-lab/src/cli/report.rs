//! Run reports and their CSV / JSON serializations.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

/// One CSV row: `system,eps,trunc,quantity,value,uncertainty`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub system: String,
    pub eps: Option<f64>,
    pub trunc: Option<usize>,
    pub quantity: String,
    pub value: f64,
    pub uncertainty: f64,
}

impl Row {
    pub fn new(system: &str, eps: Option<f64>, trunc: Option<usize>, quantity: impl Into<String>, value: f64, unc: f64) -> Self {
        Row {
            system: system.to_string(),
            eps,
            trunc,
            quantity: quantity.into(),
            value,
            uncertainty: unc,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub parameters: Map<String, Value>,
    pub results: Vec<Row>,
    pub provenance: Map<String, Value>,
    pub details: Value,
    pub status: String,
    pub exit_code: i32,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            command,
            parameters: Map::new(),
            results: Vec::new(),
            provenance: Map::new(),
            details: Value::Null,
            status: "ok".into(),
            exit_code: 0,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Serialize) {
        self.parameters.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn note(&mut self, key: &str, v: impl Serialize) {
        self.provenance.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn fail(&mut self, code: i32, message: &str) {
        self.status = format!("error: {message}");
        self.exit_code = code;
    }

    /// Rows sorted by ε (rows without ε keep their place at the front), stable otherwise.
    pub fn sort_rows(&mut self) {
        self.results
            .sort_by(|a, b| a.eps.unwrap_or(f64::NEG_INFINITY).total_cmp(&b.eps.unwrap_or(f64::NEG_INFINITY)));
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.results.is_empty() {
            wtr.write_record(["system", "eps", "trunc", "quantity", "value", "uncertainty"])?;
        }
        for r in &self.results {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
