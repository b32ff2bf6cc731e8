//! Input files: two-group trial tables and logistic problems.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use imprior_core::datasets;
use imprior_core::logit::{LogitProblem, ModelId};
use imprior_core::two_props::TwoPropData;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TRIAL_HEADER: [&str; 5] = ["id", "y1", "n1", "y2", "n2"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialTableRecord {
    pub id: String,
    pub y1: u64,
    pub n1: u64,
    pub y2: u64,
    pub n2: u64,
}

impl TrialTableRecord {
    pub fn data(&self) -> TwoPropData {
        // bounds are checked on load
        TwoPropData {
            y1: self.y1,
            n1: self.n1,
            y2: self.y2,
            n2: self.n2,
        }
    }
}

/// Reads `id,y1,n1,y2,n2` records in file order.
pub fn load_trial_tables(path: &Path) -> Result<Vec<TrialTableRecord>, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |line: u64, msg: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.iter().ne(TRIAL_HEADER) {
        return Err(parse_err(
            1,
            format!(
                "expected header `{}`, found `{}`",
                TRIAL_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut out = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for row in reader.deserialize::<TrialTableRecord>() {
        let rec = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            let msg = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            };
            parse_err(line, msg)
        })?;
        let line = out.len() as u64 + 2;
        if let Err(e) = TwoPropData::new(rec.y1, rec.n1, rec.y2, rec.n2) {
            return Err(CliError::Data {
                path: path.to_path_buf(),
                msg: format!("table `{}`: {e}", rec.id),
            });
        }
        if let Some(first) = seen.insert(rec.id.clone(), line) {
            return Err(CliError::Data {
                path: path.to_path_buf(),
                msg: format!("duplicate id `{}` (first seen on line {first})", rec.id),
            });
        }
        out.push(rec);
    }
    if out.is_empty() {
        eprintln!("warning: {} contains no tables", path.display());
    }
    Ok(out)
}

#[derive(Debug, Clone, Deserialize)]
struct LogitProblemFile {
    n: Vec<u64>,
    y: Vec<u64>,
    #[serde(rename = "Z")]
    z: Vec<Vec<f64>>,
    models: Vec<Vec<usize>>,
    #[serde(default = "one")]
    w_plus: f64,
}

fn one() -> f64 {
    1.0
}

/// Reads a logistic problem from JSON with fields `n`, `y`, `Z`, `models`
/// and optionally `w_plus`.
pub fn load_logit_problem(path: &Path) -> Result<(LogitProblem, Vec<ModelId>), CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: LogitProblemFile =
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line() as u64,
            msg: e.to_string(),
        })?;
    let data_err = |e: imprior_core::Error| CliError::Data {
        path: path.to_path_buf(),
        msg: e.to_string(),
    };
    let problem = LogitProblem::new(raw.n, raw.y, raw.z, raw.w_plus).map_err(data_err)?;
    let models = raw
        .models
        .into_iter()
        .map(ModelId::new)
        .collect::<Result<Vec<_>, _>>()
        .map_err(data_err)?;
    for m in &models {
        problem.design(m).map_err(data_err)?;
    }
    if models.is_empty() {
        return Err(CliError::Data {
            path: path.to_path_buf(),
            msg: "no models listed".into(),
        });
    }
    Ok((problem, models))
}

/// The bundled survival data with its five candidate models.
pub fn builtin_survival_data() -> (LogitProblem, Vec<ModelId>) {
    datasets::survival()
}
