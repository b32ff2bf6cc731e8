//! Result envelope and its JSON / CSV emission.

use std::io::Write;

use imprior_core::numeric::RngStream;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub type Row = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub command: String,
    pub config: Value,
    pub seed: RngStream,
    pub results: Vec<Row>,
    /// Monte Carlo standard errors; `null` for exact computations.
    pub mc_se: Option<Vec<f64>>,
    /// Scalars that describe the whole result table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Builder for one result row; keys keep insertion order.
#[derive(Debug, Default)]
pub struct RowBuilder(Row);

impl RowBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.insert(key.to_string(), v.into());
        self
    }

    /// Non-finite values become `null`.
    pub fn num(self, key: &str, v: f64) -> Self {
        self.put(key, finite(v))
    }

    /// A probability rounded to 6 decimals plus its natural log at full
    /// precision, as `key` and `log_key`.
    pub fn prob(self, key: &str, p: f64) -> Self {
        self.prob_with_log(key, p, p.ln())
    }

    /// As [`Self::prob`] with a separately computed log, for probabilities
    /// that underflow.
    pub fn prob_with_log(self, key: &str, p: f64, log_p: f64) -> Self {
        let rounded = (p * 1e6).round() / 1e6;
        self.num(key, rounded).num(&format!("log_{key}"), log_p)
    }

    pub fn build(self) -> Row {
        self.0
    }
}

fn finite(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// `ln(1 / (1 + exp(-x)))` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_table<W: Write>(w: &mut csv::Writer<W>, rows: &[Row]) -> Result<(), csv::Error> {
    let Some(first) = rows.first() else {
        return Ok(());
    };
    w.write_record(first.keys())?;
    for row in rows {
        w.write_record(row.values().map(cell))?;
    }
    Ok(())
}

pub fn emit(env: &Envelope, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let err = |e: &dyn std::fmt::Display| CliError::Output(e.to_string());
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, env).map_err(|e| err(&e))?;
            writeln!(out).map_err(|e| err(&e))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            write_table(&mut w, &env.results).map_err(|e| err(&e))?;
            w.flush().map_err(|e| err(&e))?;
            drop(w);
            if let Some(summary) = &env.summary {
                writeln!(out).map_err(|e| err(&e))?;
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record(["key", "value"]).map_err(|e| err(&e))?;
                for (k, v) in summary {
                    w.write_record([k.clone(), cell(v)]).map_err(|e| err(&e))?;
                }
                w.flush().map_err(|e| err(&e))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(log_sigmoid(-800.0), -800.0);
        assert!(log_sigmoid(800.0) == 0.0);
    }

    #[test]
    fn prob_fields() {
        let r = RowBuilder::new().prob("p", 0.123_456_789).build();
        assert_eq!(r["p"], serde_json::json!(0.123457));
        assert_eq!(r["log_p"], serde_json::json!(0.123_456_789f64.ln()));
        let r = RowBuilder::new().num("x", f64::NAN).build();
        assert!(r["x"].is_null());
    }

    #[test]
    fn csv_has_header_and_summary() {
        let env = Envelope {
            command: "x".into(),
            config: Value::Null,
            seed: RngStream::new(0),
            results: vec![RowBuilder::new().put("a", 1).put("b", "s").build()],
            mc_se: None,
            summary: Some(RowBuilder::new().put("t_star", 8).build()),
        };
        let mut buf = Vec::new();
        emit(&env, Format::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a,b\n1,s\n\nkey,value\nt_star,8\n"
        );
    }
}
