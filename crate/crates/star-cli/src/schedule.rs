//! JSON schedule documents.
//!
//! Schema:
//!
//! ```json
//! {
//!   "model": "star" | "star_s",
//!   "stages": [
//!     {
//!       "lambda": 0.02, "gamma1": 0.02, "gamma2": 0.02,
//!       "beta": 0.02, "mu": 0.02, "lipschitz": 0.02,
//!       "dictionaries": { "d1": [...], "d2": [...], "d3": [...] }
//!     }
//!   ]
//! }
//! ```
//!
//! `mu` is required for `star_s` and optional otherwise; `dictionaries`
//! is optional and holds square matrices as row-major arrays (side
//! inferred from the length). Scalars must be strictly positive.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use star_core::solver::{Model, Schedule, StageParams};
use star_core::{dictionary::DictionarySet, Matrix};

use crate::{CliError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleDoc {
    model: String,
    stages: Vec<StageDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StageDoc {
    lambda: f64,
    gamma1: f64,
    gamma2: f64,
    beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    lipschitz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dictionaries: Option<DictionariesDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DictionariesDoc {
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

fn model_from_str(s: &str) -> Result<Model> {
    match s {
        "star" => Ok(Model::Star),
        "star_s" => Ok(Model::StarS),
        other => Err(CliError::ScheduleParse(format!(
            "unknown model {other:?}, expected \"star\" or \"star_s\""
        ))),
    }
}

pub fn model_to_str(model: Model) -> &'static str {
    match model {
        Model::Star => "star",
        Model::StarS => "star_s",
    }
}

/// Square matrix from a row-major array; the side is the square root of
/// the length.
fn matrix_from_row_major(name: &str, values: &[f64]) -> Result<Matrix> {
    let side = (values.len() as f64).sqrt().round() as usize;
    if side * side != values.len() || side == 0 {
        return Err(CliError::ScheduleParse(format!(
            "dictionary {name} has {} entries, not a positive perfect square",
            values.len()
        )));
    }
    let mut m = Matrix::zeros(side, side)?;
    for r in 0..side {
        for c in 0..side {
            m.set(r, c, values[r * side + c]);
        }
    }
    Ok(m)
}

fn matrix_to_row_major(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            out.push(m.get(r, c));
        }
    }
    out
}

/// Parses and validates a schedule document.
pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let doc: ScheduleDoc = serde_json::from_str(text).map_err(|e| {
        CliError::ScheduleParse(format!(
            "line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let model = model_from_str(&doc.model)?;
    let mut stages = Vec::with_capacity(doc.stages.len());
    for stage in doc.stages {
        let dictionaries = match stage.dictionaries {
            Some(d) => Some(DictionarySet::from_matrices(
                matrix_from_row_major("d1", &d.d1)?,
                matrix_from_row_major("d2", &d.d2)?,
                matrix_from_row_major("d3", &d.d3)?,
            )?),
            None => None,
        };
        stages.push(StageParams {
            lambda: stage.lambda,
            gamma1: stage.gamma1,
            gamma2: stage.gamma2,
            beta: stage.beta,
            mu: stage.mu,
            lipschitz: stage.lipschitz,
            dictionaries,
        });
    }
    let schedule = Schedule { model, stages };
    schedule.validate()?;
    Ok(schedule)
}

/// Serializes a schedule as pretty-printed JSON.
pub fn schedule_to_json(schedule: &Schedule) -> String {
    let doc = ScheduleDoc {
        model: model_to_str(schedule.model).to_string(),
        stages: schedule
            .stages
            .iter()
            .map(|s| StageDoc {
                lambda: s.lambda,
                gamma1: s.gamma1,
                gamma2: s.gamma2,
                beta: s.beta,
                mu: s.mu,
                lipschitz: s.lipschitz,
                dictionaries: s.dictionaries.as_ref().map(|d| DictionariesDoc {
                    d1: matrix_to_row_major(&d.d1),
                    d2: matrix_to_row_major(&d.d2),
                    d3: matrix_to_row_major(&d.d3),
                }),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("schedule serialization cannot fail")
}

pub fn load_schedule(path: &Path) -> Result<Schedule> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::ScheduleParse(format!("cannot read {}: {e}", path.display())))?;
    parse_schedule(&text)
}

pub fn save_schedule(path: &Path, schedule: &Schedule) -> Result<()> {
    fs::write(path, schedule_to_json(schedule) + "\n")
        .map_err(|e| CliError::Format(format!("cannot write {}: {e}", path.display())))
}
